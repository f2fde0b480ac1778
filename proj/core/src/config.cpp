#include "stepmap/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stepmap/manifest.hpp"
#include "stepmap/param_grid.hpp"

namespace stepmap {

namespace {

using nlohmann::json;

json vec5_to_json(const Vec5& v) {
  return json::array({v[0], v[1], v[2], v[3], v[4]});
}

Vec5 vec5_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 5)
    throw std::invalid_argument("config: " + key + " must be an array of 5 numbers");
  Vec5 v;
  for (int i = 0; i < 5; ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

Eigen::Vector4d vec4_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 4)
    throw std::invalid_argument("config: " + key + " must be an array of 4 numbers");
  Eigen::Vector4d v;
  for (int i = 0; i < 4; ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

std::string task_name(ControlTask t) {
  switch (t) {
    case ControlTask::SwingFoot: return "swing_foot";
    case ControlTask::Com: return "com";
    case ControlTask::Posture: return "posture";
  }
  throw std::logic_error("unknown control task");
}

ControlTask task_from_name(const std::string& s) {
  if (s == "swing_foot") return ControlTask::SwingFoot;
  if (s == "com") return ControlTask::Com;
  if (s == "posture") return ControlTask::Posture;
  throw std::invalid_argument("config: unknown control task '" + s + "'");
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Overlays `user` onto `base`, rejecting keys that the defaults do not have
// and values whose JSON kind differs from the default's.
void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object())
    throw std::invalid_argument("config: expected an object at " +
                                (path.empty() ? std::string("<root>") : path));
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw std::invalid_argument("config: unknown key '" + here + "'");
    json& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_strict(slot, value, here);
    } else if (same_kind(slot, value)) {
      slot = value;
    } else {
      throw std::invalid_argument("config: wrong value type for '" + here + "'");
    }
  }
}

json link_to_json(const LinkParams& l) {
  return {{"length", l.length}, {"mass", l.mass}, {"inertia", l.inertia}};
}

LinkParams link_from_json(const json& j) {
  return LinkParams{j.at("length").get<double>(), j.at("mass").get<double>(),
                    j.at("inertia").get<double>()};
}

}  // namespace

std::vector<double> AxisSpec::values() const { return linspace(lo, hi, count); }

void AxisSpec::validate(const char* name) const {
  if (count < 2)
    throw std::invalid_argument(std::string("config: ") + name + " needs at least 2 samples");
  if (!(lo < hi))
    throw std::invalid_argument(std::string("config: ") + name + " range must satisfy lo < hi");
}

void PipelineConfig::validate() const {
  episode.biped.validate();
  episode.gains.validate();
  episode.weights.validate();
  bounds.validate();
  budget.validate();
  svm.validate();
  phase1_velocity.validate("phase1.velocity");
  phase1_position.validate("phase1.position");
  phase2_velocity.validate("phase2.velocity");
  phase2_position.validate("phase2.position");
  if (phase2_velocity.lo < phase1_velocity.lo || phase2_velocity.hi > phase1_velocity.hi ||
      phase2_position.lo < phase1_position.lo || phase2_position.hi > phase1_position.hi)
    throw std::invalid_argument("config: phase2 axes must lie inside the phase1 grid box");
  if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
  if (!(episode.swing.z_max > 0.0)) throw std::invalid_argument("config: z_max must be > 0");
}

nlohmann::json PipelineConfig::to_json() const {
  const BipedConfig& b = episode.biped;
  const ControllerGains& g = episode.gains;
  json priority = json::array();
  for (ControlTask t : g.priority) priority.push_back(task_name(t));
  return json{
      {"seed", seed},
      {"workers", workers},
      {"out_dir", out_dir},
      {"biped",
       {{"torso", link_to_json(b.torso)},
        {"thigh", link_to_json(b.thigh)},
        {"shank", link_to_json(b.shank)},
        {"torque_limit", vec5_to_json(b.torque_limit)},
        {"velocity_limit", vec5_to_json(b.velocity_limit)},
        {"z_nom", b.z_nom},
        {"dt", b.dt},
        {"t_total", b.t_total},
        {"gravity", b.gravity},
        {"velocity_threshold", b.velocity_threshold},
        {"fall_height", b.fall_height},
        {"settle_threshold", b.settle_threshold},
        {"swing_start_height", b.swing_start_height}}},
      {"gains",
       {{"kp_swing", g.kp_swing},
        {"kd_swing", g.kd_swing},
        {"kp_com", g.kp_com},
        {"kd_com", g.kd_com},
        {"kp_posture", g.kp_posture},
        {"kd_posture", g.kd_posture},
        {"pinv_damping", g.pinv_damping},
        {"priority", priority}}},
      {"swing", {{"z_max", episode.swing.z_max}}},
      {"weights",
       {{"w_f", episode.weights.w_f},
        {"w_swing", episode.weights.w_swing},
        {"w_x_mid", episode.weights.w_x_mid},
        {"w_z", episode.weights.w_z},
        {"w_tau", episode.weights.w_tau}}},
      {"bounds",
       {{"lo", {bounds.lo[0], bounds.lo[1], bounds.lo[2], bounds.lo[3]}},
        {"hi", {bounds.hi[0], bounds.hi[1], bounds.hi[2], bounds.hi[3]}}}},
      {"phase1",
       {{"velocity", {{"count", phase1_velocity.count}, {"lo", phase1_velocity.lo}, {"hi", phase1_velocity.hi}}},
        {"position", {{"count", phase1_position.count}, {"lo", phase1_position.lo}, {"hi", phase1_position.hi}}}}},
      {"phase2",
       {{"velocity", {{"count", phase2_velocity.count}, {"lo", phase2_velocity.lo}, {"hi", phase2_velocity.hi}}},
        {"position", {{"count", phase2_position.count}, {"lo", phase2_position.lo}, {"hi", phase2_position.hi}}}}},
      {"budget", {{"n_random", budget.n_random}, {"n_bayes", budget.n_bayes}}},
      {"svm",
       {{"c_base", svm.c_base},
        {"weight_reachable", svm.weight_reachable},
        {"weight_unreachable", svm.weight_unreachable},
        {"gamma", svm.gamma},
        {"tol", svm.tol},
        {"max_passes", svm.max_passes}}}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& user) {
  json merged = PipelineConfig{}.to_json();
  merge_strict(merged, user, "");

  PipelineConfig c;
  c.seed = merged.at("seed").get<uint64_t>();
  c.workers = merged.at("workers").get<int>();
  c.out_dir = merged.at("out_dir").get<std::string>();

  const json& jb = merged.at("biped");
  BipedConfig& b = c.episode.biped;
  b.torso = link_from_json(jb.at("torso"));
  b.thigh = link_from_json(jb.at("thigh"));
  b.shank = link_from_json(jb.at("shank"));
  b.torque_limit = vec5_from_json(jb.at("torque_limit"), "biped.torque_limit");
  b.velocity_limit = vec5_from_json(jb.at("velocity_limit"), "biped.velocity_limit");
  b.z_nom = jb.at("z_nom").get<double>();
  b.dt = jb.at("dt").get<double>();
  b.t_total = jb.at("t_total").get<double>();
  b.gravity = jb.at("gravity").get<double>();
  b.velocity_threshold = jb.at("velocity_threshold").get<double>();
  b.fall_height = jb.at("fall_height").get<double>();
  b.settle_threshold = jb.at("settle_threshold").get<double>();
  b.swing_start_height = jb.at("swing_start_height").get<double>();

  const json& jg = merged.at("gains");
  ControllerGains& g = c.episode.gains;
  g.kp_swing = jg.at("kp_swing").get<double>();
  g.kd_swing = jg.at("kd_swing").get<double>();
  g.kp_com = jg.at("kp_com").get<double>();
  g.kd_com = jg.at("kd_com").get<double>();
  g.kp_posture = jg.at("kp_posture").get<double>();
  g.kd_posture = jg.at("kd_posture").get<double>();
  g.pinv_damping = jg.at("pinv_damping").get<double>();
  g.priority.clear();
  for (const auto& t : jg.at("priority")) g.priority.push_back(task_from_name(t.get<std::string>()));

  c.episode.swing.z_max = merged.at("swing").at("z_max").get<double>();

  const json& jw = merged.at("weights");
  c.episode.weights.w_f = jw.at("w_f").get<double>();
  c.episode.weights.w_swing = jw.at("w_swing").get<double>();
  c.episode.weights.w_x_mid = jw.at("w_x_mid").get<double>();
  c.episode.weights.w_z = jw.at("w_z").get<double>();
  c.episode.weights.w_tau = jw.at("w_tau").get<double>();

  c.bounds.lo = vec4_from_json(merged.at("bounds").at("lo"), "bounds.lo");
  c.bounds.hi = vec4_from_json(merged.at("bounds").at("hi"), "bounds.hi");

  const auto axis = [](const json& j) {
    return AxisSpec{j.at("count").get<int>(), j.at("lo").get<double>(), j.at("hi").get<double>()};
  };
  c.phase1_velocity = axis(merged.at("phase1").at("velocity"));
  c.phase1_position = axis(merged.at("phase1").at("position"));
  c.phase2_velocity = axis(merged.at("phase2").at("velocity"));
  c.phase2_position = axis(merged.at("phase2").at("position"));

  c.budget.n_random = merged.at("budget").at("n_random").get<int>();
  c.budget.n_bayes = merged.at("budget").at("n_bayes").get<int>();
  c.budget.seed = c.seed;

  const json& js = merged.at("svm");
  c.svm.c_base = js.at("c_base").get<double>();
  c.svm.weight_reachable = js.at("weight_reachable").get<double>();
  c.svm.weight_unreachable = js.at("weight_unreachable").get<double>();
  c.svm.gamma = js.at("gamma").get<double>();
  c.svm.tol = js.at("tol").get<double>();
  c.svm.max_passes = js.at("max_passes").get<int>();

  c.validate();
  return c;
}

void PipelineConfig::save(const std::filesystem::path& path) const {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::string PipelineConfig::hash() const { return fnv1a64_hex(to_json().dump()); }

}  // namespace stepmap
