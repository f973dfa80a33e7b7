#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace lsindy::csv {

// Shortest decimal form that round-trips back to the same double. Used for
// every numeric file we emit so reruns are byte-identical.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x header.size()
};

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const Eigen::MatrixXd& values);

Table read(const std::filesystem::path& path);

}  // namespace lsindy::csv
