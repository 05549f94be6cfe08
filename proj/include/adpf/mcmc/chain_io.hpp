#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adpf/mcmc/rwmh.hpp"

namespace adpf {

/// draw_index, <parameters...>, log_posterior, accepted
inline void write_chain_csv(std::ostream& out, const ChainRecord& rec) {
  out << "draw_index";
  for (const auto& n : rec.names) out << ',' << n;
  out << ",log_posterior,accepted\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < rec.draws[i].size(); ++j) out << ',' << rec.draws[i][j];
    out << ',' << rec.log_posteriors[i] << ',' << int(rec.accepted[i]) << '\n';
  }
}

inline void write_chain_csv(const std::string& path, const ChainRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_chain_csv(out, rec);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline ChainRecord read_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain file " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty chain file " + path);
  const auto head = split_csv_line(line);
  if (head.size() < 3 || head.front() != "draw_index" || head[head.size() - 2] != "log_posterior" ||
      head.back() != "accepted")
    throw std::runtime_error("not a chain file: " + path);
  ChainRecord rec;
  rec.names.assign(head.begin() + 1, head.end() - 2);
  const auto d = static_cast<Eigen::Index>(rec.names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != head.size()) throw std::runtime_error("ragged row in " + path);
    Eigen::VectorXd x(d);
    for (Eigen::Index j = 0; j < d; ++j) x[j] = std::stod(cells[static_cast<std::size_t>(j) + 1]);
    rec.draws.push_back(x);
    rec.log_posteriors.push_back(std::stod(cells[cells.size() - 2]));
    rec.accepted.push_back(static_cast<char>(std::stoi(cells.back())));
  }
  return rec;
}

}  // namespace adpf
