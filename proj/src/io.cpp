#include "plaus/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "plaus/errors.hpp"

namespace plaus {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("could not parse number '" + s + "' in " + what);
  }
}

struct Columns {
  std::vector<std::string> obs_names;
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> design;
  std::vector<double> constants;
};

Dataset assemble(Columns& cols, const std::string& what) {
  if (cols.obs.empty()) throw ArgumentError(what + ": no observation columns");
  const std::size_t n = cols.obs[0].size();
  for (const auto& c : cols.obs)
    if (c.size() != n) throw ArgumentError(what + ": ragged observation columns");
  Dataset d;
  d.obs.resize(n, cols.obs.size());
  for (std::size_t j = 0; j < cols.obs.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) d.obs(i, j) = cols.obs[j][i];
  if (!cols.design.empty()) {
    for (const auto& c : cols.design)
      if (c.size() != n) throw ArgumentError(what + ": ragged design columns");
    d.design.resize(n, cols.design.size());
    for (std::size_t j = 0; j < cols.design.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) d.design(i, j) = cols.design[j][i];
  }
  if (!cols.constants.empty()) {
    if (cols.constants.size() == 1 && n > 1)
      cols.constants.assign(n, cols.constants[0]);
    if (cols.constants.size() != n)
      throw ArgumentError(what + ": constants column length mismatch");
    d.constants.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.constants[i] = cols.constants[i];
  }
  return d;
}

bool is_design_key(const std::string& k) {
  return k == "x" || (k.size() > 1 && k[0] == 'x' &&
                      (k[1] == '_' || (k[1] >= '0' && k[1] <= '9')));
}

}  // namespace

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError(path + ": empty file");
  const std::vector<std::string> header = split(line, ',');

  Columns cols;
  bool saw_constants = false;
  std::vector<int> role(header.size());  // 0 obs, 1 design, 2 constants
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& h = header[j];
    if (h == "sigma" || h == "n") {
      if (saw_constants)
        throw ArgumentError(path + ": more than one constants column");
      saw_constants = true;
      role[j] = 2;
    } else if (is_design_key(h)) {
      role[j] = 1;
      cols.design.emplace_back();
    } else {
      role[j] = 0;
      cols.obs_names.push_back(h);
      cols.obs.emplace_back();
    }
  }

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> parts = split(line, ',');
    if (parts.size() != header.size())
      throw ArgumentError(path + ": row width differs from header");
    std::size_t io = 0, id = 0;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      const double v = parse_double(parts[j], path);
      if (role[j] == 0) cols.obs[io++].push_back(v);
      else if (role[j] == 1) cols.design[id++].push_back(v);
      else cols.constants.push_back(v);
    }
  }
  return assemble(cols, path);
}

Dataset parse_inline_data(const std::string& text) {
  Columns cols;
  bool saw_constants = false;
  std::map<std::string, std::vector<double>> named_obs;
  for (const std::string& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("inline data: expected key=value, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    std::vector<double> vals;
    for (const std::string& tok : split(item.substr(eq + 1), ';'))
      if (!tok.empty()) vals.push_back(parse_double(tok, "inline data"));
    if (vals.empty()) throw ArgumentError("inline data: no values for '" + key + "'");
    if (key == "sigma" || key == "n") {
      if (saw_constants) throw ArgumentError("inline data: duplicate constants");
      saw_constants = true;
      cols.constants = vals;
    } else if (is_design_key(key)) {
      cols.design.push_back(vals);
    } else if (key == "y" || (key.size() == 2 && key[0] == 'y')) {
      named_obs[key] = vals;
    } else {
      throw ArgumentError("inline data: unknown key '" + key + "'");
    }
  }
  for (auto& [k, v] : named_obs) {
    cols.obs_names.push_back(k);
    cols.obs.push_back(std::move(v));
  }
  return assemble(cols, "inline data");
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ArgumentError("grid: expected lo:hi:count");
  const double lo = parse_double(parts[0], "grid");
  const double hi = parse_double(parts[1], "grid");
  const long count = static_cast<long>(parse_double(parts[2], "grid"));
  if (count < 2 || !(hi > lo)) throw ArgumentError("grid: need lo < hi and count >= 2");
  std::vector<double> g(count);
  for (long i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return g;
}

}  // namespace plaus
