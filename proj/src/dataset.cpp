#include "pathsmooth/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pathsmooth {

double Dataset::spacing(double fallback) const {
  if (times.size() >= 2 && times[1] > times[0]) return times[1] - times[0];
  return fallback;
}

Dataset simulate_dataset(const SdeModel& model, const Vector& theta, int n, double dt, int fine_grid, Rng& rng,
                         const SimulationOptions& options) {
  if (n < 0) throw ConfigError("observation count must be non-negative");
  if (fine_grid < 1) throw ConfigError("the simulation grid needs at least one step");
  check_parameters(model, theta);
  Dataset data;
  Vector x = model.sample_initial(theta, rng);
  for (int k = 1; k <= n; ++k) {
    const PathSegment seg = simulate_path(model, theta, x, dt, fine_grid, rng, options);
    const Vector* y_prev = data.ys.empty() ? nullptr : &data.ys.back();
    data.ys.push_back(model.sample_observation(theta, y_prev, seg, rng));
    x = seg.endpoint();
    data.xs.push_back(x);
    data.times.push_back(k * dt);
  }
  return data;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// "y", "y1", "y12" match prefix 'y'
bool indexed_name(const std::string& name, char prefix) {
  if (name.empty() || name[0] != prefix) return false;
  return std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

double parse_number(const std::string& cell, const std::string& source, int line, const std::string& column) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (cell.empty() || ec != std::errc() || ptr != e) {
    throw DataError(source + ":" + std::to_string(line) + ": column '" + column + "' is not a number: '" + cell +
                    "'");
  }
  return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": missing header row");

  int time_col = -1, date_col = -1;
  std::vector<int> y_cols, x_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string h = lower(header[c]);
    if (h == "time" || h == "t") time_col = c;
    else if (h == "date") date_col = c;
    else if (h == "value" || indexed_name(h, 'y')) y_cols.push_back(c);
    else if (indexed_name(h, 'x')) x_cols.push_back(c);
  }
  if (y_cols.empty()) throw DataError(source + ": no observation column (expected y, y1.. or value)");

  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(cells.size()));
    }
    Vector y(y_cols.size());
    for (std::size_t i = 0; i < y_cols.size(); ++i)
      y(i) = parse_number(cells[y_cols[i]], source, line_no, header[y_cols[i]]);
    data.ys.push_back(y);
    if (!x_cols.empty()) {
      Vector x(x_cols.size());
      for (std::size_t i = 0; i < x_cols.size(); ++i)
        x(i) = parse_number(cells[x_cols[i]], source, line_no, header[x_cols[i]]);
      data.xs.push_back(x);
    }
    if (time_col >= 0) data.times.push_back(parse_number(cells[time_col], source, line_no, header[time_col]));
    if (date_col >= 0) data.dates.push_back(cells[date_col]);
  }
  return data;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return parse_dataset(in, path);
}

void write_dataset(const std::string& path, const Dataset& data, bool with_latent) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  const int dy = data.ys.empty() ? 1 : static_cast<int>(data.ys[0].size());
  const int dx = data.xs.empty() ? 1 : static_cast<int>(data.xs[0].size());
  out << "index,time";
  for (int i = 0; i < dy; ++i) out << (dy == 1 ? ",y" : ",y" + std::to_string(i + 1));
  if (with_latent)
    for (int i = 0; i < dx; ++i) out << (dx == 1 ? ",x" : ",x" + std::to_string(i + 1));
  out << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < data.ys.size(); ++k) {
    out << k + 1 << "," << (k < data.times.size() ? data.times[k] : static_cast<double>(k + 1));
    for (int i = 0; i < dy; ++i) out << "," << data.ys[k](i);
    if (with_latent)
      for (int i = 0; i < dx; ++i) out << "," << data.xs[k](i);
    out << "\n";
  }
  if (!out) throw ConfigError("failed while writing '" + path + "'");
}

}  // namespace pathsmooth
