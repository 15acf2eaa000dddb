#include "mfhb/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfhb {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (...) {
    throw std::invalid_argument("config: bad number for '" + key + "': " + v);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for '" + key + "': " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (...) {
    throw std::invalid_argument("config: bad unsigned integer for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "': " + v);
}

}  // namespace

FlatConfig parse_flat_config(const std::string& text) {
  FlatConfig out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: missing '=' on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    out[key] = value;
  }
  return out;
}

FlatConfig load_flat_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_flat_config(ss.str());
}

void apply_override(FlatConfig& cfg, const std::string& key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must look like key=value: " + key_value);
  cfg[trim(key_value.substr(0, eq))] = trim(key_value.substr(eq + 1));
}

ResolvedConfig resolve_config(const FlatConfig& flat) {
  ResolvedConfig rc;
  RunConfig& c = rc.run;
  for (const auto& [key, value] : flat) {
    if (key == "d") c.d = static_cast<int>(parse_int(key, value));
    else if (key == "n") c.n = static_cast<int>(parse_int(key, value));
    else if (key == "n0") c.n0 = static_cast<int>(parse_int(key, value));
    else if (key == "m") c.m = static_cast<int>(parse_int(key, value));
    else if (key == "gamma") c.gamma = parse_double(key, value);
    else if (key == "beta") c.beta = parse_double(key, value);
    else if (key == "dt") c.dt = parse_double(key, value);
    else if (key == "steps") c.steps = parse_int(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "integrator") c.integrator = integrator_from_string(value);
    else if (key == "record_every") c.record_every = parse_int(key, value);
    else if (key == "init_scale") c.init_scale = parse_double(key, value);
    else if (key == "activation") c.activation = activation_from_string(value);
    else if (key == "t_floor") c.t_floor = parse_double(key, value);
    else if (key == "regularizer.kind") c.regularizer.kind = regularizer_kind_from_string(value);
    else if (key == "regularizer.c") c.regularizer.c = parse_double(key, value);
    else if (key == "regularizer.eps") c.regularizer.eps = parse_double(key, value);
    else if (key == "dataset.seed") {
      rc.dataset_seed = parse_u64(key, value);
      rc.dataset_seed_set = true;
    } else if (key == "diagnostics.free_energy") {
      rc.free_energy_diagnostics = parse_bool(key, value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!rc.dataset_seed_set) rc.dataset_seed = c.seed;
  c.validate();
  return rc;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records) {
  std::string out = "step,time,risk,loss,kinetic,entropy_est,free_energy_est\n";
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.time);
    out += ',';
    out += format_double(r.risk);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.kinetic);
    out += ',';
    if (r.entropy_est) out += format_double(*r.entropy_est);
    out += ',';
    if (r.free_energy_est) out += format_double(*r.free_energy_est);
    out += '\n';
  }
  return out;
}

std::string marginals_csv(const Ensemble& ens) {
  const int d = ens.dim;
  std::string out;
  for (int k = 0; k < d; ++k) {
    out += "theta" + std::to_string(k) + ",";
  }
  for (int k = 0; k < d; ++k) {
    out += "r" + std::to_string(k);
    out += (k + 1 < d) ? ',' : '\n';
  }
  for (const auto& p : ens.particles) {
    const auto flat = p.theta.flatten();
    for (int k = 0; k < d; ++k) {
      out += format_double(flat[k]);
      out += ',';
    }
    for (int k = 0; k < d; ++k) {
      out += format_double(p.r[k]);
      out += (k + 1 < d) ? ',' : '\n';
    }
  }
  return out;
}

std::string phase_density_csv(const GridDensity& rho) {
  std::string out = "theta,r,value\n";
  for (int i = 0; i < rho.grid.n_theta; ++i) {
    for (int j = 0; j < rho.grid.n_r; ++j) {
      out += format_double(rho.grid.theta(i));
      out += ',';
      out += format_double(rho.grid.r(j));
      out += ',';
      out += format_double(rho.values[rho.grid.idx(i, j)]);
      out += '\n';
    }
  }
  return out;
}

std::string theta_field_csv(const ThetaGrid& grid, const std::vector<double>& values) {
  std::string out = grid.dim == 1 ? "theta1,value\n" : "theta1,theta2,value\n";
  for (int c = 0; c < grid.cells(); ++c) {
    const auto center = grid.center(c);
    out += format_double(center[0]);
    out += ',';
    if (grid.dim == 2) {
      out += format_double(center[1]);
      out += ',';
    }
    out += format_double(values[c]);
    out += '\n';
  }
  return out;
}

}  // namespace mfhb
