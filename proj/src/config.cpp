#include "mfg/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mfg/error.hpp"

namespace mfg {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(Errc::kConfigError, "field '" + field + "': " + what);
}

void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(where, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "must be finite");
  return d;
}

long long get_int(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) fail(field, "is too large");
    return static_cast<long long>(u);
  }
  if (!v.is_number_integer()) fail(field, "must be an integer");
  return v.get<long long>();
}

int get_int_in(const json& v, const std::string& field, long long lo, long long hi = std::numeric_limits<int>::max()) {
  const long long k = get_int(v, field);
  if (k < lo || k > hi) fail(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(k);
}

std::string get_choice(const json& v, const std::string& field, const std::set<std::string>& choices) {
  if (!v.is_string()) fail(field, "must be a string");
  const auto s = v.get<std::string>();
  if (!choices.count(s)) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    fail(field, "must be one of " + list);
  }
  return s;
}

template <class F>
void with(const json& obj, const char* key, F&& f) {
  auto it = obj.find(key);
  if (it != obj.end()) f(*it);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  only_keys(doc, "", {"model", "horizon", "grid", "solver", "simulation", "study", "role", "policy", "output"});

  with(doc, "model", [&](const json& m) {
    only_keys(m, "model", {"name", "params"});
    with(m, "name", [&](const json& v) {
      if (!v.is_string()) fail("model.name", "must be a string");
      c.model = v.get<std::string>();
    });
    with(m, "params", [&](const json& p) {
      if (!p.is_object()) fail("model.params", "must be an object");
      for (const auto& [key, v] : p.items()) c.params[key] = get_number(v, "model.params." + key);
    });
  });
  with(doc, "horizon", [&](const json& v) {
    if (v.is_null()) return;
    c.horizon = get_number(v, "horizon");
    if (*c.horizon < 0.0) fail("horizon", "must be >= 0");
  });
  with(doc, "grid", [&](const json& g) {
    only_keys(g, "grid", {"K", "time_steps"});
    with(g, "K", [&](const json& v) { c.K = get_int_in(v, "grid.K", 2); });
    with(g, "time_steps", [&](const json& v) { c.time_steps = get_int_in(v, "grid.time_steps", 0); });
  });
  with(doc, "solver", [&](const json& s) {
    only_keys(s, "solver", {"damping", "tol", "max_iter"});
    with(s, "damping", [&](const json& v) {
      c.damping = get_number(v, "solver.damping");
      if (!(c.damping > 0.0 && c.damping <= 1.0)) fail("solver.damping", "must lie in (0, 1]");
    });
    with(s, "tol", [&](const json& v) {
      c.tol = get_number(v, "solver.tol");
      if (c.tol < 0.0 || c.tol > 1.0) fail("solver.tol", "must lie in [0, 1]");
    });
    with(s, "max_iter", [&](const json& v) { c.max_iter = get_int_in(v, "solver.max_iter", 0); });
  });
  with(doc, "simulation", [&](const json& s) {
    only_keys(s, "simulation", {"n_paths", "seed", "mode", "N", "initial", "record_paths"});
    with(s, "n_paths", [&](const json& v) { c.n_paths = static_cast<std::size_t>(get_int_in(v, "simulation.n_paths", 1)); });
    with(s, "seed", [&](const json& v) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        fail("simulation.seed", "must be an unsigned 64-bit integer");
      }
      c.seed = v.get<std::uint64_t>();
    });
    with(s, "mode", [&](const json& v) { c.mode = get_choice(v, "simulation.mode", {"nplayer", "pair", "triple"}); });
    with(s, "N", [&](const json& v) { c.N = get_int_in(v, "simulation.N", 1); });
    with(s, "record_paths", [&](const json& v) {
      if (!v.is_boolean()) fail("simulation.record_paths", "must be a boolean");
      c.record_paths = v.get<bool>();
    });
    with(s, "initial", [&](const json& init) {
      only_keys(init, "simulation.initial", {"i0", "i", "x"});
      with(init, "i0", [&](const json& v) { c.i0 = get_int_in(v, "simulation.initial.i0", 1); });
      with(init, "i", [&](const json& v) { c.i = get_int_in(v, "simulation.initial.i", 1); });
      with(init, "x", [&](const json& v) {
        if (!v.is_array()) fail("simulation.initial.x", "must be an array");
        c.x.clear();
        for (const auto& e : v) {
          const double d = get_number(e, "simulation.initial.x");
          if (d < 0.0 || d > 1.0) fail("simulation.initial.x", "entries must lie in [0, 1]");
          c.x.push_back(d);
        }
      });
    });
  });
  with(doc, "study", [&](const json& s) {
    only_keys(s, "study", {"N_list", "K_ref", "kind", "reference"});
    with(s, "N_list", [&](const json& v) {
      if (!v.is_array() || v.empty()) fail("study.N_list", "must be a nonempty array");
      c.N_list.clear();
      for (const auto& e : v) {
        c.N_list.push_back(get_int_in(e, "study.N_list", 1));
        if (c.N_list.size() > 1 && c.N_list.back() <= c.N_list[c.N_list.size() - 2]) {
          fail("study.N_list", "must be strictly increasing");
        }
      }
    });
    with(s, "K_ref", [&](const json& v) { c.K_ref = get_int_in(v, "study.K_ref", 2); });
    with(s, "kind", [&](const json& v) { c.study = get_choice(v, "study.kind", {"cost", "value"}); });
    with(s, "reference", [&](const json& v) { c.reference = get_choice(v, "study.reference", {"plain", "richardson"}); });
  });
  with(doc, "role", [&](const json& v) { c.role = get_choice(v, "role", {"major", "minor"}); });
  with(doc, "policy", [&](const json& p) {
    only_keys(p, "policy", {"kind", "major", "minor", "deviant"});
    with(p, "kind", [&](const json& v) { c.policy.kind = get_choice(v, "policy.kind", {"constant", "equilibrium", "master"}); });
    with(p, "major", [&](const json& v) { c.policy.major = get_int_in(v, "policy.major", 0); });
    with(p, "minor", [&](const json& v) { c.policy.minor = get_int_in(v, "policy.minor", 0); });
    with(p, "deviant", [&](const json& v) {
      if (v.is_null()) {
        c.policy.deviant.reset();
      } else {
        c.policy.deviant = get_int_in(v, "policy.deviant", 0);
      }
    });
  });
  with(doc, "output", [&](const json& o) {
    only_keys(o, "output", {"dir"});
    with(o, "dir", [&](const json& v) {
      if (!v.is_string() || v.get<std::string>().empty()) fail("output.dir", "must be a nonempty string");
      c.out_dir = v.get<std::string>();
    });
  });
  if (c.K_ref < c.N_list.back()) fail("study.K_ref", "must be >= max(study.N_list)");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kConfigError, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c, int indent) {
  json params = json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  json doc = {
      {"model", {{"name", c.model}, {"params", params}}},
      {"horizon", c.horizon ? json(*c.horizon) : json(nullptr)},
      {"grid", {{"K", c.K}, {"time_steps", c.time_steps}}},
      {"solver", {{"damping", c.damping}, {"tol", c.tol}, {"max_iter", c.max_iter}}},
      {"simulation",
       {{"n_paths", c.n_paths},
        {"seed", c.seed},
        {"mode", c.mode},
        {"N", c.N},
        {"initial", {{"i0", c.i0}, {"i", c.i}, {"x", c.x}}},
        {"record_paths", c.record_paths}}},
      {"study", {{"N_list", c.N_list}, {"K_ref", c.K_ref}, {"kind", c.study}, {"reference", c.reference}}},
      {"role", c.role},
      {"policy",
       {{"kind", c.policy.kind},
        {"major", c.policy.major},
        {"minor", c.policy.minor},
        {"deviant", c.policy.deviant ? json(*c.policy.deviant) : json(nullptr)}}},
      {"output", {{"dir", c.out_dir}}},
  };
  return doc.dump(indent);
}

ModelSpec config_model(const RunConfig& c) {
  ParamMap p = c.params;
  if (c.horizon) p["T"] = *c.horizon;
  return build_builtin(c.model, p);
}

}  // namespace mfg
