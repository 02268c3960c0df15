#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "errors.hpp"
#include "experiments.hpp"
#include "functionals.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"
#include "soliton.hpp"

namespace nlslab {

// 64-bit FNV-1a, used as the provenance hash of configuration text.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

// One parsed INI file:
//
//   [grid]          dim, N, L (half-length, per axis as "a" or "a,b")
//   [nonlinearity]  kind = pure_power | cubic_quintic | none, p
//   [soliton.K]     omega, v, x0, gamma
//   [plan]          dt, t_start, t_end, snapshot_stride, dealias, ladder, sample_interval, threads
//   [analysis]      s_max, T1, A0, t_max, seed
//   [output]        dir
struct ExperimentConfig {
  Grid grid = Grid::line(1024, 40.0);
  MultiSolitonConfig solitons;

  double dt = 1e-3;
  double t_start = 0.0;
  double t_end = 1.0;
  int snapshot_stride = 100;
  std::optional<bool> dealias;
  std::vector<double> ladder;
  double sample_interval = 0.1;
  int threads = 1;

  int s_max = 3;
  double T1 = 2.0;
  double A0 = 1.0;
  double t_max = 6.0;
  std::uint64_t seed = 0;

  std::string output_dir = "out";
  std::string source;  // raw text the configuration was parsed from
  std::string hash;    // FNV-1a of the source

  double horizon() const {
    double t = std::max(std::abs(t_start), std::abs(t_end));
    for (double s : ladder) t = std::max(t, std::abs(s));
    return t;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out = solitons.violations();
    if (grid.dim() != solitons.dim) out.push_back("grid.dim = " + std::to_string(grid.dim()) + " but solitons are " +
                                                  std::to_string(solitons.dim) + "D");
    if (!solitons.solitons.empty() && grid.dim() == solitons.dim) {
      double wmin = std::numeric_limits<double>::infinity();
      for (const auto& s : solitons.solitons) wmin = std::min(wmin, s.omega);
      if (wmin > 0.0) {
        for (int a = 0; a < grid.dim(); ++a) {
          double need = 0.0;
          for (const auto& s : solitons.solitons) {
            const auto ax = static_cast<std::size_t>(a);
            need = std::max(need, std::abs(s.x0[ax]) + std::abs(s.v[ax]) * horizon());
          }
          need += 10.0 / std::sqrt(wmin);
          if (grid.half_length(a) < need) {
            std::ostringstream os;
            os << "grid.L[" << a << "] = " << grid.half_length(a) << " is too small: need L >= " << need
               << " (max |x0| + |v| T_max + 10/sqrt(omega_min), T_max = " << horizon() << ")";
            out.push_back(os.str());
          }
        }
      }
    }
    double h = grid.spacing(0);
    if (grid.dim() == 2) h = std::min(h, grid.spacing(1));
    if (!(dt > 0.0) || dt > 0.5 * h * h) {
      std::ostringstream os;
      os << "plan.dt = " << dt << " must lie in (0, 0.5 h^2 = " << 0.5 * h * h << "]";
      out.push_back(os.str());
    }
    if (t_end == t_start) out.push_back("plan.t_end must differ from plan.t_start");
    if (snapshot_stride < 1) out.push_back("plan.snapshot_stride must be >= 1");
    if (!(sample_interval > 0.0)) out.push_back("plan.sample_interval must be > 0");
    if (threads < 1) out.push_back("plan.threads must be >= 1");
    for (std::size_t n = 1; n < ladder.size(); ++n)
      if (!(ladder[n] > ladder[n - 1])) {
        out.push_back("plan.ladder must be strictly increasing");
        break;
      }
    if (!ladder.empty() && !(ladder.front() > T1)) out.push_back("plan.ladder entries must exceed analysis.T1");
    if (s_max < 0 || s_max > kMaxDerivativeOrder) out.push_back("analysis.s_max must lie in [0, 6]");
    if (!(T1 > 0.0)) out.push_back("analysis.T1 must be > 0");
    if (!(t_max > T1)) out.push_back("analysis.t_max must exceed analysis.T1");
    if (solitons.size() >= 2) {
      const double limit = CutoffFamily::max_half_width(solitons);
      if (!(A0 > 0.0) || !(A0 < limit)) {
        std::ostringstream os;
        os << "analysis.A0 = " << A0 << " must lie in (0, " << limit
           << "): the cutoff half-width stays below half the smallest gap between first velocity components";
        out.push_back(os.str());
      }
    } else if (!(A0 > 0.0)) {
      out.push_back("analysis.A0 must be > 0");
    }
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid configuration (" + std::to_string(v.size()) + " problem" + (v.size() > 1 ? "s" : "") + "):";
    for (const auto& s : v) msg += "\n  " + s;
    throw ConfigError(msg);
  }

  PropagationPlan plan() const {
    PropagationPlan p;
    p.dt = t_end >= t_start ? dt : -dt;
    p.t_start = t_start;
    p.t_end = t_end;
    p.snapshot_stride = snapshot_stride;
    p.dealias = dealias;
    return p;
  }

  ConstructionSetup construction() const {
    ConstructionSetup st;
    st.solitons = solitons;
    st.grid = grid;
    st.dt = dt;
    st.S_ladder = ladder;
    st.T1 = T1;
    st.s_max = s_max;
    st.sample_interval = sample_interval;
    st.dealias = dealias;
    st.threads = threads;
    return st;
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& key, std::vector<std::string>& errors) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t[");
    const auto e = item.find_last_not_of(" \t]");
    if (b == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const std::string tok = item.substr(b, e - b + 1);
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      errors.push_back(key + ": cannot read '" + item + "' as a number");
    }
  }
  return out;
}

class IniReader {
 public:
  IniReader(const boost::property_tree::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

  template <class T>
  void read(const std::string& section, const std::string& key, T& target) {
    const auto* node = find(section, key);
    if (!node) return;
    const std::string text = node->data();
    std::istringstream is(text);
    T value{};
    if constexpr (std::is_same_v<T, std::string>) {
      value = text;
    } else if constexpr (std::is_same_v<T, bool>) {
      std::string s;
      is >> s;
      if (s == "true" || s == "1" || s == "yes" || s == "on") value = true;
      else if (s == "false" || s == "0" || s == "no" || s == "off") value = false;
      else {
        errors_.push_back(section + "." + key + ": expected a boolean, got '" + text + "'");
        return;
      }
    } else {
      is >> value;
      if (!is || !(is >> std::ws).eof()) {
        errors_.push_back(section + "." + key + ": cannot parse '" + text + "'");
        return;
      }
    }
    target = value;
  }

  std::optional<std::vector<double>> list(const std::string& section, const std::string& key) {
    const auto* node = find(section, key);
    if (!node) return std::nullopt;
    return parse_list(node->data(), section + "." + key, errors_);
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    const auto* node = find(section, key);
    if (!node) return std::nullopt;
    return node->data();
  }

  void check_unused() const {
    for (const auto& [name, sec] : tree_) {
      if (sec.empty() && !sec.data().empty()) {
        errors_.push_back("'" + name + "' is outside any section");
        continue;
      }
      for (const auto& [key, value] : sec)
        if (!used_.count(name + "\n" + key)) errors_.push_back("unknown key " + name + "." + key);
    }
  }

 private:
  const boost::property_tree::ptree* find(const std::string& section, const std::string& key) {
    const auto sec = tree_.find(section);
    if (sec == tree_.not_found()) return nullptr;
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found()) return nullptr;
    used_.insert(section + "\n" + key);
    return &it->second;
  }

  const boost::property_tree::ptree& tree_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
};

inline Vec to_vec(const std::vector<double>& v, const std::string& key, std::vector<std::string>& errors) {
  if (v.empty() || v.size() > 2) {
    errors.push_back(key + ": expected 1 or 2 components");
    return {0.0, 0.0};
  }
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

}  // namespace detail

// Parses INI text; all problems (syntax, unknown keys, value and cross-field
// rules) are reported together in one ConfigError.
inline ExperimentConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream is(text);
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  std::vector<std::string> errors;
  detail::IniReader rd(tree, errors);
  ExperimentConfig cfg;
  cfg.source = text;
  cfg.hash = hex64(fnv1a(text));

  int dim = 1;
  rd.read("grid", "dim", dim);
  std::array<int, 2> n{1024, 1024};
  Vec L{40.0, 40.0};
  if (auto v = rd.list("grid", "N")) {
    if (!v->empty()) n = {static_cast<int>((*v)[0]), static_cast<int>(v->size() > 1 ? (*v)[1] : (*v)[0])};
  }
  if (auto v = rd.list("grid", "L")) {
    if (!v->empty()) L = {(*v)[0], v->size() > 1 ? (*v)[1] : (*v)[0]};
  }
  try {
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim must be 1 or 2");
    cfg.grid = Grid::make(dim, n, L);
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
    dim = std::clamp(dim, 1, 2);
  }

  std::string kind = "pure_power";
  double p = 3.0;
  rd.read("nonlinearity", "kind", kind);
  rd.read("nonlinearity", "p", p);
  try {
    if (kind == "pure_power") cfg.solitons.nl = Nonlinearity::pure_power(p);
    else if (kind == "cubic_quintic") cfg.solitons.nl = Nonlinearity::cubic_quintic();
    else if (kind == "none") cfg.solitons.nl = Nonlinearity::none();
    else errors.push_back("nonlinearity.kind = '" + kind + "' (expected pure_power, cubic_quintic or none)");
  } catch (const ConfigError& e) {
    errors.push_back(std::string("nonlinearity.p: ") + e.what());
  }
  cfg.solitons.dim = dim;

  std::vector<std::pair<int, std::string>> sections;
  for (const auto& [name, sec] : tree) {
    if (name.rfind("soliton.", 0) != 0) continue;
    try {
      std::size_t used = 0;
      const int k = std::stoi(name.substr(8), &used);
      if (used != name.size() - 8 || k < 1) throw std::invalid_argument(name);
      sections.emplace_back(k, name);
    } catch (const std::exception&) {
      errors.push_back("section [" + name + "]: soliton sections are named [soliton.1], [soliton.2], ...");
    }
  }
  std::sort(sections.begin(), sections.end());
  for (const auto& [k, name] : sections) {
    SolitonParams s;
    rd.read(name, "omega", s.omega);
    rd.read(name, "gamma", s.gamma);
    if (auto v = rd.list(name, "v")) s.v = detail::to_vec(*v, name + ".v", errors);
    if (auto v = rd.list(name, "x0")) s.x0 = detail::to_vec(*v, name + ".x0", errors);
    cfg.solitons.solitons.push_back(s);
  }

  rd.read("plan", "dt", cfg.dt);
  rd.read("plan", "t_start", cfg.t_start);
  rd.read("plan", "t_end", cfg.t_end);
  rd.read("plan", "snapshot_stride", cfg.snapshot_stride);
  rd.read("plan", "sample_interval", cfg.sample_interval);
  rd.read("plan", "threads", cfg.threads);
  if (auto d = rd.text("plan", "dealias")) {
    bool b = false;
    rd.read("plan", "dealias", b);
    cfg.dealias = b;
  }
  if (auto v = rd.list("plan", "ladder")) cfg.ladder = *v;

  rd.read("analysis", "s_max", cfg.s_max);
  rd.read("analysis", "T1", cfg.T1);
  rd.read("analysis", "A0", cfg.A0);
  rd.read("analysis", "t_max", cfg.t_max);
  rd.read("analysis", "seed", cfg.seed);
  rd.read("output", "dir", cfg.output_dir);
  rd.check_unused();

  for (auto& v : cfg.violations()) errors.push_back(std::move(v));
  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem" + (errors.size() > 1 ? "s" : "") + "):";
    for (const auto& s : errors) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("config: cannot open " + path);
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace nlslab
