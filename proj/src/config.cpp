#include "ocflow/scenarios/config.hpp"

#include "ocflow/core/io.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace ocflow::scen {

int ScenarioConfig::n_steps() const {
  const double exact = t_final_s / dt_s;
  const int n = static_cast<int>(std::lround(exact));
  if (n <= 0 || std::abs(exact - n) > 1e-9 * std::max(1.0, exact))
    throw Error("config: t_final_s must be an integer multiple of dt_s");
  return n;
}

int ScenarioConfig::n_stored() const {
  return 1 + n_steps() / snapshot_stride;
}

double ScenarioConfig::stored_time(int k) const {
  return k * snapshot_stride * dt_s;
}

namespace {

/// Field table driving parsing and canonical serialization.
struct FieldDef {
  enum Kind { kString, kDouble, kInt, kBool, kUint } kind;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
  bool required = false;
};

std::map<std::string, FieldDef> make_fields() {
  using C = ScenarioConfig;
  std::map<std::string, FieldDef> f;
  auto dbl = [](double C::* m, bool req = false) {
    return FieldDef{FieldDef::kDouble,
                    [m](C& c, const std::string& v) {
                      c.*m = io::parse_double(v, "config value");
                    },
                    [m](const C& c) { return io::format_double(c.*m); }, req};
  };
  auto num = [](int C::* m) {
    return FieldDef{FieldDef::kInt,
                    [m](C& c, const std::string& v) {
                      c.*m = static_cast<int>(io::parse_int(v, "config value"));
                    },
                    [m](const C& c) { return std::to_string(c.*m); }, false};
  };
  auto flag = [](bool C::* m) {
    return FieldDef{FieldDef::kBool,
                    [m](C& c, const std::string& v) {
                      const long long x = io::parse_int(v, "config value");
                      if (x != 0 && x != 1)
                        throw Error("config value: expected 0 or 1, got " + v);
                      c.*m = x != 0;
                    },
                    [m](const C& c) { return c.*m ? "1" : "0"; }, false};
  };

  f["geom_kind"] = FieldDef{
      FieldDef::kString,
      [](C& c, const std::string& v) {
        if (v != "channel" && v != "bifurcation_2d" && v != "bifurcation_3d")
          throw Error("config: geom_kind must be channel, bifurcation_2d, or "
                      "bifurcation_3d (got '" + v + "')");
        c.geom_kind = v;
      },
      [](const C& c) { return c.geom_kind; }, true};
  f["nu_mm2_s"] = dbl(&C::nu_mm2_s, true);
  f["dt_s"] = dbl(&C::dt_s, true);
  f["t_final_s"] = dbl(&C::t_final_s, true);
  f["alpha"] = dbl(&C::alpha);
  f["v_const_mm_s"] = dbl(&C::v_const_mm_s);
  f["param_dim"] = num(&C::param_dim);
  f["re_min"] = dbl(&C::re_min);
  f["re_max"] = dbl(&C::re_max);
  f["n_train"] = num(&C::n_train);
  f["seed"] = FieldDef{
      FieldDef::kUint,
      [](C& c, const std::string& v) {
        c.seed = static_cast<std::uint64_t>(io::parse_int(v, "config seed"));
      },
      [](const C& c) { return std::to_string(c.seed); }, false};
  f["snapshot_stride"] = num(&C::snapshot_stride);
  f["n_t_pod"] = num(&C::n_t_pod);
  f["n_max"] = num(&C::n_max);
  f["pod_energy_squared"] = flag(&C::pod_energy_squared);
  f["pod_drop_tol"] = dbl(&C::pod_drop_tol);
  f["use_supremizers"] = flag(&C::use_supremizers);
  f["n_sup"] = num(&C::n_sup);
  f["r_in_mm"] = dbl(&C::r_in_mm);
  f["branch_angle_rad"] = dbl(&C::branch_angle_rad);
  f["branch_length_mm"] = dbl(&C::branch_length_mm);
  f["outlet_length_mm"] = dbl(&C::outlet_length_mm);
  f["target_h_mm"] = dbl(&C::target_h_mm);
  f["newton_tol"] = dbl(&C::newton_tol);
  f["newton_max_iter"] = num(&C::newton_max_iter);
  return f;
}

const std::map<std::string, FieldDef>& fields() {
  static const std::map<std::string, FieldDef> f = make_fields();
  return f;
}

void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw Error(std::string("config: ") + name + " must be positive");
  };
  positive(c.nu_mm2_s, "nu_mm2_s");
  positive(c.dt_s, "dt_s");
  positive(c.t_final_s, "t_final_s");
  positive(c.alpha, "alpha");
  positive(c.r_in_mm, "r_in_mm");
  positive(c.target_h_mm, "target_h_mm");
  positive(c.newton_tol, "newton_tol");
  if (c.param_dim != 1 && c.param_dim != 2)
    throw Error("config: param_dim must be 1 or 2");
  if (c.geom_kind == "channel" && c.param_dim != 1)
    throw Error("config: the channel has one inlet, param_dim must be 1");
  if (c.re_min > c.re_max)
    throw Error("config: re_min must not exceed re_max");
  if (c.n_train < 1) throw Error("config: n_train must be at least 1");
  if (c.snapshot_stride < 1)
    throw Error("config: snapshot_stride must be at least 1");
  if (c.n_t_pod < 1) throw Error("config: n_t_pod must be at least 1");
  if (c.n_max < 1) throw Error("config: n_max must be at least 1");
  if (c.n_sup < 0) throw Error("config: n_sup must be non-negative");
  if (c.newton_max_iter < 1)
    throw Error("config: newton_max_iter must be at least 1");
  c.n_steps();  // validates divisibility
  if (c.n_steps() % c.snapshot_stride != 0)
    throw Error("config: snapshot_stride must divide the step count");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text,
                            const std::string& origin) {
  ScenarioConfig cfg;
  std::map<std::string, bool> seen;
  std::istringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(origin + " line " + std::to_string(line_no) +
                  ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto strip = [](std::string s) {
      const auto b2 = s.find_first_not_of(" \t");
      if (b2 == std::string::npos) return std::string();
      const auto e2 = s.find_last_not_of(" \t");
      return s.substr(b2, e2 - b2 + 1);
    };
    key = strip(key);
    val = strip(val);
    auto it = fields().find(key);
    if (it == fields().end())
      throw Error(origin + " line " + std::to_string(line_no) +
                  ": unknown key '" + key + "'");
    if (seen[key])
      throw Error(origin + " line " + std::to_string(line_no) +
                  ": duplicate key '" + key + "'");
    seen[key] = true;
    try {
      it->second.set(cfg, val);
    } catch (const Error& err) {
      throw Error(origin + " line " + std::to_string(line_no) + ": key '" +
                  key + "': " + err.what());
    }
  }
  for (const auto& [key, def] : fields())
    if (def.required && !seen[key])
      throw Error(origin + ": missing required key '" + key + "'");
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  return parse_config(io::read_text_file(path), path);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, def] : fields())  // std::map: sorted keys
    os << key << "=" << def.get(cfg) << "\n";
  return os.str();
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  return linalg::fnv1a64(serialize_config(cfg));
}

std::uint64_t fom_fingerprint(const ScenarioConfig& cfg) {
  static const std::map<std::string, bool> reduction_only = {
      {"n_t_pod", true},       {"n_max", true},
      {"pod_energy_squared", true}, {"pod_drop_tol", true},
      {"use_supremizers", true},    {"n_sup", true},
  };
  std::ostringstream os;
  for (const auto& [key, def] : fields())
    if (!reduction_only.count(key)) os << key << "=" << def.get(cfg) << "\n";
  return linalg::fnv1a64(os.str());
}

geom::Mesh build_scenario_mesh(const ScenarioConfig& cfg) {
  if (cfg.geom_kind == "channel") {
    geom::ChannelSpec s;
    s.half_width = cfg.r_in_mm;
    s.length = cfg.outlet_length_mm;
    s.target_h = cfg.target_h_mm;
    return geom::make_channel(s);
  }
  geom::BifurcationSpec s;
  s.inlet_half_width = cfg.r_in_mm;
  s.branch_angle = cfg.branch_angle_rad;
  s.branch_length = cfg.branch_length_mm;
  s.outlet_length = cfg.outlet_length_mm;
  s.target_h = cfg.target_h_mm;
  return cfg.geom_kind == "bifurcation_2d" ? geom::make_bifurcation_2d(s)
                                           : geom::make_bifurcation_3d(s);
}

}  // namespace ocflow::scen
