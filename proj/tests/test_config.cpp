// Pipeline configuration: published default constants, strict JSON merging,
// round-trip serialization, and the config fingerprint.
//
// Oracles:
//  - [PAPER] every default below is the published model/pipeline constant.
//  - [DERIVED] the standing CoM height bound follows from the link geometry:
//    (50*1.35 + 2*10*0.675 + 2*10*0.225) / 90 = 0.95 m.
//  - [TRIVIAL] error-message spelling, hash formatting, save/load.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "stepmap/config.hpp"
#include "stepmap/manifest.hpp"

namespace {

std::filesystem::path temp_root() {
  const auto dir = std::filesystem::temp_directory_path() / "stepmap_test_config";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults reproduce the published constants") {
  const stepmap::PipelineConfig c;
  CHECK_NOTHROW(c.validate());

  const stepmap::BipedConfig& b = c.episode.biped;
  CHECK(b.torso.length == 0.90);
  CHECK(b.torso.mass == 50.0);
  CHECK(b.torso.inertia == 50.0 * 0.90 * 0.90 / 12.0);
  CHECK(b.thigh.length == 0.45);
  CHECK(b.thigh.mass == 10.0);
  CHECK(b.thigh.inertia == 10.0 * 0.45 * 0.45 / 12.0);
  CHECK(b.shank.length == 0.45);
  CHECK(b.shank.mass == 10.0);
  CHECK(b.shank.inertia == 10.0 * 0.45 * 0.45 / 12.0);
  const stepmap::Vec5 tau_lim = (stepmap::Vec5() << 120.0, 300.0, 250.0, 250.0, 300.0).finished();
  CHECK((b.torque_limit - tau_lim).norm() == 0.0);
  CHECK((b.velocity_limit - stepmap::Vec5::Constant(25.0)).norm() == 0.0);
  CHECK(b.z_nom == 0.925);
  CHECK(b.dt == 1e-3);
  CHECK(b.t_total == 7.0);
  CHECK(b.gravity == 9.81);
  CHECK(b.velocity_threshold == 1e6);
  CHECK(b.fall_height == 0.4);
  CHECK(b.settle_threshold == 0.5);
  CHECK(b.swing_start_height == 0.01);
  CHECK(b.total_mass() == 90.0);
  // Straight-leg CoM height: hips at 0.9, torso CoM at 1.35, thigh CoMs at
  // 0.675, shank CoMs at 0.225 -> 85.5 / 90 = 0.95 m, above z_nom.
  CHECK(b.max_standing_com_height() ==
        doctest::Approx((50.0 * 1.35 + 20.0 * 0.675 + 20.0 * 0.225) / 90.0).epsilon(1e-12));
  CHECK(b.max_standing_com_height() > b.z_nom);

  const stepmap::ControllerGains& g = c.episode.gains;
  CHECK(g.kp_swing == 100.0);
  CHECK(g.kd_swing == 20.0);
  CHECK(g.kp_com == 100.0);
  CHECK(g.kd_com == 20.0);
  CHECK(g.kp_posture == 25.0);
  CHECK(g.kd_posture == 10.0);
  CHECK(g.pinv_damping == 1e-6);
  REQUIRE(g.priority.size() == 3);
  CHECK(g.priority[0] == stepmap::ControlTask::SwingFoot);
  CHECK(g.priority[1] == stepmap::ControlTask::Com);
  CHECK(g.priority[2] == stepmap::ControlTask::Posture);

  CHECK(c.episode.swing.z_max == 0.08);

  const stepmap::ObjectiveWeights& w = c.episode.weights;
  CHECK(w.w_f == 0.001);
  CHECK(w.w_swing == 50.0);
  CHECK(w.w_x_mid == 1.0);
  CHECK(w.w_z == 1.0);
  CHECK(w.w_tau == 0.0002);

  CHECK((c.bounds.lo - Eigen::Vector4d{0.01, 0.01, 0.01, 0.2}).norm() == 0.0);
  CHECK((c.bounds.hi - Eigen::Vector4d{0.99, 0.99, 0.08, 3.0}).norm() == 0.0);

  CHECK(c.phase1_velocity.count == 15);
  CHECK(c.phase1_velocity.lo == 0.1);
  CHECK(c.phase1_velocity.hi == 0.5);
  CHECK(c.phase1_position.count == 10);
  CHECK(c.phase1_position.lo == 0.1);
  CHECK(c.phase1_position.hi == 0.8);
  CHECK(c.phase2_velocity.count == 40);
  CHECK(c.phase2_velocity.lo == 0.1);
  CHECK(c.phase2_velocity.hi == 0.5);
  CHECK(c.phase2_position.count == 20);
  CHECK(c.phase2_position.lo == 0.1);
  CHECK(c.phase2_position.hi == 0.8);

  CHECK(c.budget.n_random == 100);
  CHECK(c.budget.n_bayes == 70);
  CHECK(c.seed == 2024);
  CHECK(c.workers == 0);
  CHECK(c.out_dir == "out");

  CHECK(c.svm.c_base == 10.0);
  CHECK(c.svm.weight_reachable == 1.0);
  CHECK(c.svm.weight_unreachable == 14.0);
  CHECK(c.svm.gamma == 0.0);
  CHECK(c.svm.tol == 1e-3);
  CHECK(c.svm.max_passes == 200000);
}

TEST_CASE("AxisSpec generates inclusive uniform axes") {
  const stepmap::AxisSpec axis{5, 0.0, 1.0};
  const std::vector<double> expected{0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK(axis.values() == expected);

  const auto v15 = stepmap::PipelineConfig{}.phase1_velocity.values();
  REQUIRE(v15.size() == 15);
  CHECK(v15.front() == 0.1);
  CHECK(v15.back() == 0.5);  // linspace pins the endpoint exactly

  CHECK_THROWS_AS((stepmap::AxisSpec{1, 0.0, 1.0}.validate("x")), std::invalid_argument);
  CHECK_THROWS_AS((stepmap::AxisSpec{5, 2.0, 2.0}.validate("x")), std::invalid_argument);
  CHECK_THROWS_AS((stepmap::AxisSpec{5, 3.0, 2.0}.validate("x")), std::invalid_argument);
}

TEST_CASE("seeded_budget applies the master seed") {
  stepmap::PipelineConfig c;
  c.seed = 42;
  c.budget.n_random = 17;
  c.budget.n_bayes = 9;
  const stepmap::BoBudget b = c.seeded_budget();
  CHECK(b.seed == 42);
  CHECK(b.n_random == 17);
  CHECK(b.n_bayes == 9);
}

TEST_CASE("JSON round-trip is lossless") {
  stepmap::PipelineConfig c;
  c.seed = 0xFFFFFFFFFFFFFFFFull;  // full-width seeds survive serialization
  c.workers = 3;
  c.out_dir = "runs/a";
  c.phase2_velocity = {12, 0.15, 0.45};
  c.svm.gamma = 0.7;
  c.episode.weights.w_tau = 5e-4;
  c.episode.biped.t_total = 5.0;
  c.bounds.hi[2] = 0.07;
  c.episode.gains.priority = {stepmap::ControlTask::Posture, stepmap::ControlTask::SwingFoot,
                              stepmap::ControlTask::Com};

  const nlohmann::json j = c.to_json();
  CHECK(j.at("gains").at("priority") ==
        nlohmann::json::array({"posture", "swing_foot", "com"}));

  const stepmap::PipelineConfig c2 = stepmap::PipelineConfig::from_json(j);
  CHECK(c2.to_json() == j);
  CHECK(c2.seed == c.seed);
  CHECK(c2.workers == 3);
  CHECK(c2.out_dir == "runs/a");
  CHECK(c2.phase2_velocity.count == 12);
  CHECK(c2.phase2_velocity.lo == 0.15);
  CHECK(c2.phase2_velocity.hi == 0.45);
  CHECK(c2.svm.gamma == 0.7);
  CHECK(c2.episode.weights.w_tau == 5e-4);
  CHECK(c2.episode.biped.t_total == 5.0);
  CHECK(c2.bounds.hi[2] == 0.07);
  CHECK(c2.episode.gains.priority == c.episode.gains.priority);
  CHECK(c2.budget.seed == c.seed);  // from_json re-applies the master seed
  CHECK(c2.hash() == c.hash());
}

TEST_CASE("from_json overlays only the given keys onto the defaults") {
  const nlohmann::json user = {{"seed", 999},
                               {"budget", {{"n_random", 12}}},
                               {"biped", {{"z_nom", 0.9}}}};
  const stepmap::PipelineConfig c = stepmap::PipelineConfig::from_json(user);
  CHECK(c.seed == 999);
  CHECK(c.budget.n_random == 12);
  CHECK(c.budget.n_bayes == 70);  // untouched default
  CHECK(c.budget.seed == 999);
  CHECK(c.episode.biped.z_nom == 0.9);
  CHECK(c.episode.biped.dt == 1e-3);  // untouched default
  CHECK(c.workers == 0);

  // An empty override reproduces the defaults exactly.
  const stepmap::PipelineConfig d = stepmap::PipelineConfig::from_json(nlohmann::json::object());
  CHECK(d.to_json() == stepmap::PipelineConfig{}.to_json());
}

TEST_CASE("unknown keys and wrong value kinds are rejected with their path") {
  using nlohmann::json;
  CHECK_THROWS_WITH_AS(stepmap::PipelineConfig::from_json(json{{"typo", 1}}),
                       "config: unknown key 'typo'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(stepmap::PipelineConfig::from_json(json{{"biped", {{"z_nmo", 0.9}}}}),
                       "config: unknown key 'biped.z_nmo'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      stepmap::PipelineConfig::from_json(json{{"budget", {{"n_random", "many"}}}}),
      "config: wrong value type for 'budget.n_random'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(stepmap::PipelineConfig::from_json(json{{"gains", {{"priority", 3}}}}),
                       "config: wrong value type for 'gains.priority'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(stepmap::PipelineConfig::from_json(json{{"biped", 5}}),
                       "config: wrong value type for 'biped'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(stepmap::PipelineConfig::from_json(json{{"out_dir", 3}}),
                       "config: wrong value type for 'out_dir'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(stepmap::PipelineConfig::from_json(json::array()),
                       "config: expected an object at <root>", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      stepmap::PipelineConfig::from_json(
          json{{"gains", {{"priority", {"swing_foot", "com", "postural"}}}}}),
      "config: unknown control task 'postural'", std::invalid_argument);
}

TEST_CASE("validate rejects inconsistent pipelines") {
  stepmap::PipelineConfig c;
  c.phase2_velocity.hi = 0.6;  // wider than the phase-1 optimization grid
  CHECK_THROWS_WITH_AS(c.validate(), "config: phase2 axes must lie inside the phase1 grid box",
                       std::invalid_argument);

  stepmap::PipelineConfig c2;
  c2.workers = -1;
  CHECK_THROWS_AS(c2.validate(), std::invalid_argument);

  stepmap::PipelineConfig c3;
  c3.out_dir.clear();
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);

  stepmap::PipelineConfig c4;
  c4.phase1_velocity.count = 1;
  CHECK_THROWS_AS(c4.validate(), std::invalid_argument);
}

TEST_CASE("config hash is the FNV-1a fingerprint of the canonical dump") {
  const stepmap::PipelineConfig c;
  const std::string h = c.hash();
  CHECK(h == stepmap::fnv1a64_hex(c.to_json().dump()));
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);

  stepmap::PipelineConfig other;
  other.seed = 2025;
  CHECK(other.hash() != h);
  CHECK(stepmap::PipelineConfig{}.hash() == h);  // deterministic across instances
}

TEST_CASE("save/load round-trips through a file") {
  const auto dir = temp_root();
  stepmap::PipelineConfig c;
  c.seed = 7;
  c.out_dir = "artifacts";

  const auto path = dir / "nested" / "sub" / "config.json";
  std::filesystem::remove_all(dir / "nested");
  c.save(path);  // parent directories are created on demand
  REQUIRE(std::filesystem::exists(path));

  const stepmap::PipelineConfig c2 = stepmap::PipelineConfig::load(path);
  CHECK(c2.to_json() == c.to_json());
  CHECK(c2.hash() == c.hash());

  CHECK_THROWS_AS(stepmap::PipelineConfig::load(dir / "missing.json"), std::runtime_error);

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(stepmap::PipelineConfig::load(bad), std::invalid_argument);
}
