#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace green_ssl::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kRuntimeError = 3,
};

/// Parses `args` (without the program name) and executes one subcommand.
/// Human-readable progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// One labelled polyline of a chart panel.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Minimal standalone SVG with the panels laid out side by side.
void write_svg(const std::string& path, const std::vector<Panel>& panels);

/// Parses "1,2,5" and inclusive ranges such as "1-20" or "1-20,30".
std::vector<long long> parse_int_list(const std::string& text);

}  // namespace green_ssl::cli
