#include "artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "botune/error.hpp"

namespace botune::artifacts {

namespace {

std::ofstream open_or_throw(const std::filesystem::path& p, std::ios::openmode mode) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, mode);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  return f;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  auto f = open_or_throw(p, std::ios::out | std::ios::trunc | std::ios::binary);
  f << text;
  if (!f) throw IoError("write failed: " + p.string());
}

void append_line(const std::filesystem::path& p, const std::string& line) {
  auto f = open_or_throw(p, std::ios::out | std::ios::app | std::ios::binary);
  f << line << '\n';
  f.flush();
  if (!f) throw IoError("write failed: " + p.string());
}

void write_trajectory_csv(const std::filesystem::path& p, const Trajectory& t) {
  std::ostringstream os;
  os << "t,r,y,u,d,x1\n";
  char buf[160];
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.3f,%.9g,%.9g,%.9g,%.9g,%.9g\n", t.t[k], t.r[k], t.y[k], t.u[k],
                  t.d[k], t.x1[k]);
    os << buf;
  }
  write_text(p, os.str());
}

void write_svg_plot(const std::filesystem::path& p, const PlotSpec& spec, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (spec.log_x && !(s.x[i] > 0))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return ml + (tx(x) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "font-family=\"sans-serif\" font-size=\"12\">\n",
                W, H);
  os << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">", W / 2);
  os << buf << escape(spec.title) << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, W - ml - mr, H - mt - mb);
  os << buf;

  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">", ml - 6, py(yv) + 4);
    os << buf << tick(yv) << "</text>\n";
  }
  if (spec.log_x) {
    for (int e = static_cast<int>(std::ceil(x0 - 1e-9)); e <= static_cast<int>(std::floor(x1 + 1e-9)); ++e) {
      const double xv = std::pow(10.0, e);
      std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", px(xv), H - mb + 16);
      os << buf << tick(xv) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0;
      std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", px(xv), H - mb + 16);
      os << buf << tick(xv) << "</text>\n";
    }
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", (ml + W - mr) / 2, H - 12);
  os << buf << escape(spec.xlabel) << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.1f)\">",
                (mt + H - mb) / 2, (mt + H - mb) / 2);
  os << buf << escape(spec.ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* col = colors[s % 5];
    os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << col << "\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i]) || (spec.log_x && !(series[s].x[i] > 0))) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(series[s].x[i]), py(series[s].y[i]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">", ml + 10, mt + 16 + 16.0 * s, col);
    os << buf << escape(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  write_text(p, os.str());
}

}  // namespace botune::artifacts
