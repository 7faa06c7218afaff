#pragma once

// File writers shared by the campaign commands: CSV, minimal SVG line plots.

#include <filesystem>
#include <string>
#include <vector>

#include "botune/plant.hpp"

namespace botune::artifacts {

std::string fmt(double v);  // shortest "%.17g"-exact text, "nan"/"inf" spelled out

void write_text(const std::filesystem::path& p, const std::string& text);
void append_line(const std::filesystem::path& p, const std::string& line);

void write_trajectory_csv(const std::filesystem::path& p, const Trajectory& t);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool log_x = false;
};

void write_svg_plot(const std::filesystem::path& p, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace botune::artifacts
