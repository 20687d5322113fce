#include "oscmfg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "oscmfg/error.hpp"

namespace oscmfg {

const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::Simulate: return "simulate";
    case Subcommand::Spectrum: return "spectrum";
    case Subcommand::Bifurcation: return "bifurcation";
    case Subcommand::Learn: return "learn";
    case Subcommand::Fpf: return "fpf";
    case Subcommand::OracleCompare: return "oracle-compare";
  }
  return "unknown";
}

Subcommand parse_subcommand(std::string_view name) {
  for (Subcommand s : {Subcommand::Simulate, Subcommand::Spectrum, Subcommand::Bifurcation, Subcommand::Learn,
                       Subcommand::Fpf, Subcommand::OracleCompare})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

FilterConfig OracleSection::matched_filter() {
  FilterConfig f;
  f.sigma = 0.0;
  f.sigma_B = 0.0;
  f.gamma_f = 0.0;
  f.T = 20.0;
  return f;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& v, int line, const std::string& key) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("key '" + key + "' expects a finite number, got '" + v + "'", line);
  return x;
}

template <class Int>
Int to_integer(const std::string& v, int line, const std::string& key) {
  Int x{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'", line);
  return x;
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + v + "'", line);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, int)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Binding {
  std::string key;
  Setter set;
  Getter get;
};

template <class Ref>
Binding bind_double(std::string key, Ref ref) {
  return {key, [ref, key](ExperimentConfig& c, const std::string& v, int line) { ref(c) = to_double(v, line, key); },
          [ref](const ExperimentConfig& c) { return fmt_double(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Int, class Ref>
Binding bind_int(std::string key, Ref ref) {
  return {key,
          [ref, key](ExperimentConfig& c, const std::string& v, int line) { ref(c) = to_integer<Int>(v, line, key); },
          [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Ref>
Binding bind_bool(std::string key, Ref ref) {
  return {key, [ref, key](ExperimentConfig& c, const std::string& v, int line) { ref(c) = to_bool(v, line, key); },
          [ref](const ExperimentConfig& c) { return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); }};
}

Binding bind_observation(std::string key, FilterConfig& (*ref)(ExperimentConfig&)) {
  return {key,
          [ref, key](ExperimentConfig& c, const std::string& v, int line) {
            try {
              ref(c).h.kind = ObservationFunction::parse_kind(v);
            } catch (const DomainError&) {
              throw ConfigError("key '" + key + "' expects cos, sin, zero or constant, got '" + v + "'", line);
            }
          },
          [ref](const ExperimentConfig& c) { return ref(const_cast<ExperimentConfig&>(c)).h.tag(); }};
}

std::vector<Binding> filter_bindings(FilterConfig& (*ref)(ExperimentConfig&)) {
  return {
      bind_double("omega0", [ref](ExperimentConfig& c) -> double& { return ref(c).omega0; }),
      bind_double("sigma", [ref](ExperimentConfig& c) -> double& { return ref(c).sigma; }),
      bind_double("sigma_B", [ref](ExperimentConfig& c) -> double& { return ref(c).sigma_B; }),
      bind_double("gamma_f", [ref](ExperimentConfig& c) -> double& { return ref(c).gamma_f; }),
      bind_int<std::size_t>("N", [ref](ExperimentConfig& c) -> std::size_t& { return ref(c).N; }),
      bind_double("dt", [ref](ExperimentConfig& c) -> double& { return ref(c).dt; }),
      bind_double("T", [ref](ExperimentConfig& c) -> double& { return ref(c).T; }),
      bind_double("theta0", [ref](ExperimentConfig& c) -> double& { return ref(c).theta0; }),
      bind_observation("h", ref),
      bind_double("h_shift", [ref](ExperimentConfig& c) -> double& { return ref(c).h.shift; }),
      bind_double("h_level", [ref](ExperimentConfig& c) -> double& { return ref(c).h.level; }),
  };
}

struct Section {
  std::string name;
  std::vector<Binding> keys;
  std::function<void(const ExperimentConfig&)> validate;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw DomainError("invalid_params", what);
}

const std::vector<Section>& sections() {
  static const std::vector<Section> table = [] {
    std::vector<Section> t;

    t.push_back({"run",
                 {{"subcommand",
                   [](ExperimentConfig& c, const std::string& v, int line) {
                     try {
                       c.subcommand = parse_subcommand(v);
                     } catch (const ConfigError& e) {
                       throw ConfigError(e.what(), line);
                     }
                   },
                   [](const ExperimentConfig& c) { return std::string(to_string(*c.subcommand)); }}},
                 [](const ExperimentConfig&) {}});

    t.push_back({"output",
                 {bind_int<std::uint64_t>("seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.seed; }),
                  {"out", [](ExperimentConfig& c, const std::string& v, int) { c.out = v; },
                   [](const ExperimentConfig& c) { return c.out; }},
                  bind_int<std::size_t>("record_stride",
                                        [](ExperimentConfig& c) -> std::size_t& { return c.record_stride; })},
                 [](const ExperimentConfig& c) { expect(c.record_stride >= 1, "record_stride must be >= 1"); }});

    auto mp = [](ExperimentConfig& c) -> ModelParams& { return c.simulate.params; };
    t.push_back({"simulate",
                 {bind_double("sigma", [mp](ExperimentConfig& c) -> double& { return mp(c).sigma; }),
                  bind_double("gamma", [mp](ExperimentConfig& c) -> double& { return mp(c).gamma; }),
                  bind_double("R", [mp](ExperimentConfig& c) -> double& { return mp(c).R; }),
                  bind_double("kappa", [mp](ExperimentConfig& c) -> double& { return mp(c).kappa; }),
                  bind_double("epsilon", [mp](ExperimentConfig& c) -> double& { return mp(c).epsilon; }),
                  bind_double("wave_speed", [mp](ExperimentConfig& c) -> double& { return mp(c).wave_speed; }),
                  bind_int<std::size_t>("N", [mp](ExperimentConfig& c) -> std::size_t& { return mp(c).N; }),
                  bind_double("dt", [mp](ExperimentConfig& c) -> double& { return mp(c).dt; }),
                  bind_double("T", [](ExperimentConfig& c) -> double& { return c.simulate.T; }),
                  bind_bool("record_phases", [](ExperimentConfig& c) -> bool& { return c.simulate.record_phases; })},
                 [](const ExperimentConfig& c) {
                   c.simulate.params.validate();
                   expect(c.simulate.T > 0.0, "T must be positive");
                 }});

    t.push_back({"spectrum",
                 {bind_double("sigma", [](ExperimentConfig& c) -> double& { return c.spectrum.sigma; }),
                  bind_double("gamma", [](ExperimentConfig& c) -> double& { return c.spectrum.gamma; }),
                  bind_int<int>("k", [](ExperimentConfig& c) -> int& { return c.spectrum.k; }),
                  bind_double("floor_fraction", [](ExperimentConfig& c) -> double& { return c.spectrum.floor_fraction; }),
                  bind_double("ivp_R", [](ExperimentConfig& c) -> double& { return c.spectrum.ivp_R; }),
                  bind_double("ivp_T", [](ExperimentConfig& c) -> double& { return c.spectrum.ivp_T; }),
                  bind_int<std::size_t>("K_max", [](ExperimentConfig& c) -> std::size_t& { return c.spectrum.K_max; }),
                  bind_int<std::size_t>("n_omega", [](ExperimentConfig& c) -> std::size_t& { return c.spectrum.n_omega; })},
                 [](const ExperimentConfig& c) {
                   const auto& s = c.spectrum;
                   expect(s.sigma > 0.0, "sigma must be positive");
                   expect(s.gamma >= 0.0 && s.gamma < 1.0, "gamma must lie in [0, 1)");
                   expect(s.k != 0, "k must be non-zero");
                   expect(s.floor_fraction > 0.0 && s.floor_fraction < 1.0, "floor_fraction must lie in (0, 1)");
                   expect(s.ivp_R >= 0.0, "ivp_R must be >= 0");
                   expect(s.ivp_T > 0.0, "ivp_T must be positive");
                   expect(s.K_max >= 1 && s.n_omega >= 1, "K_max and n_omega must be >= 1");
                 }});

    t.push_back({"bifurcation",
                 {bind_double("sigma", [](ExperimentConfig& c) -> double& { return c.bifurcation.sigma; }),
                  bind_double("gamma_min", [](ExperimentConfig& c) -> double& { return c.bifurcation.gamma_min; }),
                  bind_double("gamma_max", [](ExperimentConfig& c) -> double& { return c.bifurcation.gamma_max; }),
                  bind_int<std::size_t>("gamma_count",
                                        [](ExperimentConfig& c) -> std::size_t& { return c.bifurcation.gamma_count; })},
                 [](const ExperimentConfig& c) {
                   const auto& b = c.bifurcation;
                   expect(b.sigma > 0.0, "sigma must be positive");
                   expect(b.gamma_min >= 0.0 && b.gamma_max >= b.gamma_min && b.gamma_max < 1.0,
                          "need 0 <= gamma_min <= gamma_max < 1");
                   expect(b.gamma_count >= 1, "gamma_count must be >= 1");
                 }});

    auto le = [](ExperimentConfig& c) -> LearningExperimentConfig& { return c.learn.experiment; };
    t.push_back({"learn",
                 {bind_int<std::size_t>("N", [le](ExperimentConfig& c) -> std::size_t& { return le(c).N; }),
                  bind_double("omega1", [le](ExperimentConfig& c) -> double& { return le(c).omega1; }),
                  bind_double("gamma", [le](ExperimentConfig& c) -> double& { return le(c).gamma; }),
                  bind_double("sigma", [le](ExperimentConfig& c) -> double& { return le(c).sigma; }),
                  bind_double("kappa", [le](ExperimentConfig& c) -> double& { return le(c).kappa; }),
                  bind_double("epsilon", [le](ExperimentConfig& c) -> double& { return le(c).epsilon; }),
                  bind_double("R", [le](ExperimentConfig& c) -> double& { return le(c).R; }),
                  bind_double("wave_speed", [le](ExperimentConfig& c) -> double& { return le(c).wave_speed; }),
                  bind_double("T", [le](ExperimentConfig& c) -> double& { return le(c).T; }),
                  bind_double("dt", [le](ExperimentConfig& c) -> double& { return le(c).dt; }),
                  bind_double("A0", [le](ExperimentConfig& c) -> double& { return le(c).A0; }),
                  bind_double("zeta0", [le](ExperimentConfig& c) -> double& { return le(c).zeta0; }),
                  bind_bool("portrait", [](ExperimentConfig& c) -> bool& { return c.learn.portrait; })},
                 [](const ExperimentConfig& c) { c.learn.experiment.validate(); }});

    static FilterConfig& (*fpf_ref)(ExperimentConfig&) = [](ExperimentConfig& c) -> FilterConfig& {
      return c.fpf.filter;
    };
    auto fk = filter_bindings(fpf_ref);
    fk.push_back({"snapshots",
                  [](ExperimentConfig& c, const std::string& v, int line) {
                    c.fpf.snapshots.clear();
                    std::size_t start = 0;
                    while (start <= v.size() && !v.empty()) {
                      std::size_t comma = v.find(',', start);
                      std::string item = trim(std::string_view(v).substr(start, comma - start));
                      c.fpf.snapshots.push_back(to_double(item, line, "snapshots"));
                      if (comma == std::string::npos) break;
                      start = comma + 1;
                    }
                  },
                  [](const ExperimentConfig& c) {
                    std::string s;
                    for (std::size_t i = 0; i < c.fpf.snapshots.size(); ++i)
                      s += (i ? ", " : "") + fmt_double(c.fpf.snapshots[i]);
                    return s;
                  }});
    fk.push_back(bind_int<std::size_t>("bins", [](ExperimentConfig& c) -> std::size_t& { return c.fpf.bins; }));
    t.push_back({"fpf", fk, [](const ExperimentConfig& c) {
                   c.fpf.filter.validate();
                   expect(c.fpf.bins >= 1, "bins must be >= 1");
                   for (double s : c.fpf.snapshots) expect(s >= 0.0 && s <= c.fpf.filter.T, "snapshot outside [0, T]");
                 }});

    static FilterConfig& (*oracle_ref)(ExperimentConfig&) = [](ExperimentConfig& c) -> FilterConfig& {
      return c.oracle.filter;
    };
    auto ok = filter_bindings(oracle_ref);
    ok.push_back(bind_int<std::size_t>("M", [](ExperimentConfig& c) -> std::size_t& { return c.oracle.M; }));
    ok.push_back(bind_int<std::size_t>("bins", [](ExperimentConfig& c) -> std::size_t& { return c.oracle.bins; }));
    ok.push_back({"gain",
                  [](ExperimentConfig& c, const std::string& v, int line) {
                    if (v == "exact")
                      c.oracle.exact_gain = true;
                    else if (v == "galerkin")
                      c.oracle.exact_gain = false;
                    else
                      throw ConfigError("key 'gain' expects exact or galerkin, got '" + v + "'", line);
                  },
                  [](const ExperimentConfig& c) { return std::string(c.oracle.exact_gain ? "exact" : "galerkin"); }});
    t.push_back({"oracle-compare", ok, [](const ExperimentConfig& c) {
                   c.oracle.filter.validate();
                   expect(c.oracle.M >= 8, "M must be >= 8");
                   expect(c.oracle.bins >= 1 && c.oracle.M % c.oracle.bins == 0, "bins must divide M");
                 }});
    return t;
  }();
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  const auto& table = sections();
  const Section* current = nullptr;
  std::map<std::string, int> section_lines;
  std::set<std::string> seen_keys;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      current = nullptr;
      for (const auto& s : table)
        if (s.name == name) current = &s;
      if (!current) throw ConfigError("unknown section '" + name + "'", line_no);
      if (section_lines.count(name)) throw ConfigError("duplicate section '" + name + "'", line_no);
      section_lines[name] = line_no;
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    if (!current) throw ConfigError("key outside of any section", line_no);
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    const Binding* b = nullptr;
    for (const auto& kb : current->keys)
      if (kb.key == key) b = &kb;
    if (!b) throw ConfigError("unknown key '" + key + "' in section [" + current->name + "]", line_no);
    if (!seen_keys.insert(current->name + "." + key).second)
      throw ConfigError("duplicate key '" + key + "'", line_no);
    b->set(cfg, value, line_no);
  }
  if (section_lines.count("run") && !cfg.subcommand)
    throw ConfigError("missing required key 'subcommand' in section [run]", section_lines["run"]);
  for (const auto& s : table) {
    try {
      s.validate(cfg);
    } catch (const DomainError& e) {
      auto it = section_lines.find(s.name);
      throw ConfigError("[" + s.name + "] " + e.what(), it == section_lines.end() ? 0 : it->second);
    }
  }
  return cfg;
}

std::string print_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& s : sections()) {
    if (s.name == "run" && !config.subcommand) continue;
    if (!out.empty()) out += "\n";
    out += "[" + s.name + "]\n";
    for (const auto& b : s.keys) out += b.key + " = " + b.get(config) + "\n";
  }
  return out;
}

}  // namespace oscmfg
