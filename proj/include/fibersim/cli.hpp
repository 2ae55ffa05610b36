#ifndef FIBERSIM_CLI_HPP
#define FIBERSIM_CLI_HPP

#include "fibersim/alphapath.hpp"
#include "fibersim/channels.hpp"
#include "fibersim/correlation.hpp"
#include "fibersim/fibration.hpp"
#include "fibersim/polymer.hpp"
#include "fibersim/semiclassical.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fibersim::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 domain violation, 2 I/O or parse error.
inline constexpr int kOk = 0;
inline constexpr int kDomainError = 1;
inline constexpr int kIoError = 2;

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Reproducibility record: identical manifests imply byte-identical primary
/// outputs (fixed seed, fixed iteration orders, no timestamps in outputs).
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::string out_dir;
  std::string version = kVersion;

  nlohmann::json to_json() const {
    return {{"subcommand", subcommand}, {"inputs", inputs},   {"seed", seed},
            {"tol", tol},               {"out_dir", out_dir}, {"version", version},
            {"config_hash", hash_hex()}};
  }

  std::string hash_hex() const {
    std::ostringstream canon;
    canon << subcommand << '\x1f';
    for (const auto& i : inputs) canon << i << '\x1f';
    canon << seed << '\x1f' << tol << '\x1f' << version;
    std::ostringstream hex;
    hex << std::hex << fnv1a(canon.str());
    return hex.str();
  }
};

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  return nlohmann::json::parse(in);
}

inline void emit(const nlohmann::json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::ios_base::failure("cannot write " + out_path);
    out << text;
  }
}

inline std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

/// Factor an ambient dimension into qubit factors when no shape is given.
inline TensorShape default_shape(long dim, const std::string& dims_csv) {
  if (!dims_csv.empty()) return TensorShape(parse_int_list(dims_csv));
  std::vector<int> dims;
  long d = dim;
  while (d > 1 && d % 2 == 0) {
    dims.push_back(2);
    d /= 2;
  }
  if (d != 1) return TensorShape({static_cast<int>(dim)});
  return TensorShape(dims);
}

namespace detail {

inline int cmd_topology_validate(const std::string& file) {
  const TopologyFile tf = topology_file_from_json(load_json(file));
  auto result = FiniteTopology::validate(tf.points, tf.opens);
  if (std::holds_alternative<TopologyViolation>(result)) {
    const auto& v = std::get<TopologyViolation>(result);
    std::cout << "invalid: " << v.describe() << "\n";
    return kDomainError;
  }
  const auto& topo = std::get<FiniteTopology>(result);
  std::cout << topo.opens().size() << " opens, valid\n";
  return kOk;
}

inline int cmd_algebra_commutant(const std::string& file, const std::string& out) {
  const GateSet gens = gateset_from_json(load_json(file));
  if (gens.gates.empty()) throw std::invalid_argument("no generators in file");
  const long d = gens.gates.front().matrix.rows();
  std::vector<CMatrix> mats;
  for (const auto& g : gens.gates) mats.push_back(g.matrix);
  const MatrixStarAlgebra alg = generate_algebra(mats, d);
  const MatrixStarAlgebra comm = alg.commutant();
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& b : comm.basis()) basis.push_back(matrix_to_json(b));
  emit({{"ambient_dim", d},
        {"algebra_span_dim", alg.span_dim()},
        {"commutant_span_dim", comm.span_dim()},
        {"commutant_basis", basis}},
       out);
  return kOk;
}

inline int cmd_algebra_orbit(const std::string& state_file, const std::string& gates_file,
                             int depth, double dedup_tol, const std::string& out) {
  const DensityOperator rho = density_from_json(load_json(state_file));
  const GateSet gates = gateset_from_json(load_json(gates_file));
  const auto states = orbit(rho, gates, depth, dedup_tol);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : states) arr.push_back(density_to_json(s));
  emit({{"orbit_size", states.size()}, {"states", arr}}, out);
  return kOk;
}

inline int cmd_channel_check(const std::string& file) {
  const KrausChannel c = channel_from_json(load_json(file));
  const bool cp = is_completely_positive(c);
  const bool tp = is_trace_preserving(map_of(c));
  std::cout << "completeness_residual " << c.completeness_residual() << "\n"
            << "completely_positive " << (cp ? "yes" : "no") << "\n"
            << "trace_preserving " << (tp ? "yes" : "no") << "\n";
  return cp && tp ? kOk : kDomainError;
}

inline int cmd_measure(const std::string& functional, const std::string& state_file,
                       const std::string& cut_csv, const std::string& dims_csv,
                       bool bits, std::uint64_t seed, const RunManifest& manifest,
                       const std::string& out) {
  const DensityOperator rho = density_from_json(load_json(state_file));
  const double rescale = bits ? 1.0 / std::log(2.0) : 1.0;
  nlohmann::json result{{"functional", functional}, {"manifest_hash", manifest.hash_hex()}};
  nlohmann::json metadata{{"log_base", bits ? "2" : "e"}};

  if (functional == "entropy") {
    result["value"] = von_neumann_entropy(rho) * rescale;
    result["exactness"] = "closed-form";
  } else if (functional == "purity") {
    result["value"] = purity(rho);
    result["exactness"] = "closed-form";
  } else {
    const TensorShape shape = default_shape(rho.dim(), dims_csv);
    const Bipartition cut(shape, parse_int_list(cut_csv.empty() ? "0" : cut_csv));
    if (functional == "negativity") {
      result["value"] = negativity(rho, cut);
      result["exactness"] = "closed-form";
    } else if (functional == "log_negativity") {
      result["value"] = log_negativity(rho, cut) * rescale;
      result["exactness"] = "closed-form";
    } else if (functional == "mutual_information") {
      result["value"] = mutual_information(rho, cut) * rescale;
      result["exactness"] = "closed-form";
    } else if (functional == "discord") {
      const DiscordResult d = discord(rho, cut);
      result["value"] = d.value * rescale;
      result["exactness"] = "optimized-upper-bound";
      metadata["measured_side"] = d.measured_side;
    } else if (functional == "ree") {
      const ReeResult r = ree_estimate(rho, cut, 40, 400, seed);
      result["value"] = r.bound * rescale;
      result["exactness"] = r.exactness;
      metadata["iterations"] = r.iterations;
    } else if (functional == "separability") {
      const Separability s = is_separable_ppt(rho, cut);
      result["value"] = s == Separability::Separable     ? "separable"
                        : s == Separability::Entangled   ? "entangled"
                                                         : "inconclusive";
      result["exactness"] = "closed-form";
    } else {
      throw std::invalid_argument("unknown functional: " + functional);
    }
  }
  result["metadata"] = metadata;
  emit(result, out);
  return kOk;
}

inline int cmd_classify(const std::string& op_file, const std::string& functional,
                        const std::string& dims_csv, const std::string& cut_csv,
                        std::uint64_t seed, double tolerance, const RunManifest& manifest,
                        const std::string& out) {
  const CMatrix op = matrix_from_json(load_json(op_file));
  const TensorShape shape = default_shape(op.rows(), dims_csv);
  const Bipartition cut(shape, parse_int_list(cut_csv.empty() ? "0" : cut_csv));
  CorrelationFunctional f;
  if (functional == "negativity") f = negativity_functional(cut);
  else if (functional == "log_negativity") f = log_negativity_functional(cut);
  else if (functional == "mutual_information") f = mutual_information_functional(cut);
  else if (functional == "discord") f = discord_functional(cut);
  else throw std::invalid_argument("unknown functional: " + functional);

  Rng rng(seed);
  const auto probes = default_probe_states(cut, rng, 80, 20);
  const SemiclassicalVerdict v = in_Af(op, f, cut, probes, tolerance, op_file);
  nlohmann::json j{{"operator", op_file},
                   {"functional", f.name},
                   {"manifest_hash", manifest.hash_hex()},
                   {"probes_checked", v.probes_checked},
                   {"probes_vanished", v.probes_vanished},
                   {"max_increase", v.max_increase}};
  switch (v.kind) {
    case MembershipKind::CertifiedMember: j["verdict"] = "certified-member"; break;
    case MembershipKind::ProbeMember: j["verdict"] = "probe-member"; break;
    case MembershipKind::NonMember:
      j["verdict"] = "non-member";
      j["witness_increase"] = v.witness_increase;
      if (v.witness) j["witness"] = density_to_json(*v.witness);
      break;
  }
  emit(j, out);
  return kOk;
}

inline int cmd_fibration_assemble(const std::string& dir) {
  FibrationBundle bundle = load_fibration_bundle(dir);
  auto [fib, report] = QuantumFibration::assemble(std::move(bundle.topology),
                                                  std::move(bundle.assignments));
  for (const auto& m : report.metadata) std::cout << "note: " << m << "\n";
  if (!report.ok()) {
    for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
    return kDomainError;
  }
  std::cout << "assembled: " << fib->topology().opens().size() << " opens\n";
  return kOk;
}

inline int cmd_fibration_fiber(const std::string& dir, const std::string& open_csv,
                               const std::string& out) {
  FibrationBundle bundle = load_fibration_bundle(dir);
  auto [fib, report] = QuantumFibration::assemble(std::move(bundle.topology),
                                                  std::move(bundle.assignments));
  if (!report.ok()) {
    for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
    return kDomainError;
  }
  std::vector<std::string> labels;
  std::stringstream ss(open_csv);
  std::string item;
  while (std::getline(ss, item, ',')) labels.push_back(item);
  const OpenSet u = fib->topology().mask_of(labels);
  if (!fib->topology().is_open(u)) throw std::invalid_argument("set is not open");
  const auto fiber = fib->fiber(u);
  if (!fiber) {
    emit({{"open", labels}, {"fiber", "empty"}}, out);
    return kOk;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : *fiber) arr.push_back(density_to_json(s));
  emit({{"open", labels}, {"fiber_size", fiber->size()}, {"states", arr}}, out);
  return kOk;
}

inline void write_trajectory_outputs(const Trajectory& traj, const RunManifest& manifest,
                                     const std::string& out_dir, bool dump_states) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / "trajectory.csv");
    csv << "t,energy";
    for (std::size_t k = 1; k <= traj.ee_cuts.front().size(); ++k) csv << ",ee_cut_" << k;
    csv << "\n";
    csv.precision(17);
    for (std::size_t i = 0; i < traj.steps(); ++i) {
      csv << traj.times[i] << "," << traj.energy[i];
      for (double e : traj.ee_cuts[i]) csv << "," << e;
      csv << "\n";
    }
  }
  {
    nlohmann::json m = manifest.to_json();
    m["trace_drift"] = traj.trace_drift;
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << m.dump(2) << "\n";
  }
  if (dump_states) {
    fs::create_directories(fs::path(out_dir) / "states");
    for (std::size_t i = 0; i < traj.steps(); ++i) {
      std::ofstream sf(fs::path(out_dir) / "states" /
                       ("state_" + std::to_string(i) + ".json"));
      sf << density_to_json(traj.state_at(i)).dump() << "\n";
    }
  }
  {
    // Plot script consuming the CSV; no embedded renderer.
    std::ofstream py(fs::path(out_dir) / "plot.py");
    py << "import csv\n"
          "import matplotlib.pyplot as plt\n"
          "rows = list(csv.DictReader(open('trajectory.csv')))\n"
          "t = [float(r['t']) for r in rows]\n"
          "plt.plot(t, [float(r['energy']) for r in rows], label='energy')\n"
          "for key in rows[0]:\n"
          "    if key.startswith('ee_cut_'):\n"
          "        plt.plot(t, [float(r[key]) for r in rows], label=key)\n"
          "plt.xlabel('t')\n"
          "plt.legend()\n"
          "plt.savefig('trajectory.png', dpi=150)\n";
  }
}

inline int cmd_polymer_anneal(const std::string& config_file, const RunManifest& manifest,
                              const std::string& out_dir) {
  const nlohmann::json cfg = load_json(config_file);
  const PolymerSpec spec = polymer_spec_from_json(cfg);
  const Schedule schedule = schedule_from_json(cfg.value("schedule", nlohmann::json::object()));
  const auto& run = cfg.at("run");
  const Trajectory traj = anneal(spec, schedule, run.at("T").get<double>(),
                                 run.at("steps").get<int>());
  write_trajectory_outputs(traj, manifest, out_dir, run.value("dump_states", false));
  std::cout << "final energy " << traj.energy.back() << ", trace drift "
            << traj.trace_drift << "\n";
  return kOk;
}

inline int cmd_polymer_evolve(const std::string& config_file, const RunManifest& manifest,
                              const std::string& out_dir) {
  const nlohmann::json cfg = load_json(config_file);
  const PolymerSpec spec = polymer_spec_from_json(cfg);
  auto table_of = [&](const nlohmann::json& j) {
    ParameterTable t;
    for (const auto& row : j) {
      t.grid.push_back(row.at("s").get<double>());
      t.values.push_back(row.at("values").get<std::vector<double>>());
    }
    return t;
  };
  const ParameterTable j_table = table_of(cfg.at("J_table"));
  const ParameterTable h_table = table_of(cfg.at("h_table"));
  const auto& run = cfg.at("run");
  const Trajectory traj = evolve_general(spec, j_table, h_table, run.at("T").get<double>(),
                                         run.at("steps").get<int>());
  write_trajectory_outputs(traj, manifest, out_dir, run.value("dump_states", false));
  std::cout << "final energy " << traj.energy.back() << ", trace drift "
            << traj.trace_drift << "\n";
  return kOk;
}

inline int cmd_alpha_check(const std::string& grid_file, const std::string& functional,
                           const std::string& out) {
  const nlohmann::json j = load_json(grid_file);
  AlphaFunctional alpha;
  if (functional == "value") {
    alpha = {"value", [](const PathPoint& p) {
               if (!p.state) throw std::invalid_argument("point carries no value");
               return p.state->operator()(0, 0).real();
             }};
  } else if (functional == "entropy") {
    alpha = {"entropy", [](const PathPoint& p) {
               if (!p.state) throw std::invalid_argument("point carries no state");
               return von_neumann_entropy(*p.state);
             }};
  } else if (functional == "purity") {
    alpha = {"purity", [](const PathPoint& p) {
               if (!p.state) throw std::invalid_argument("point carries no state");
               return (*p.state * *p.state).trace().real();
             }};
  } else {
    throw std::invalid_argument("unknown alpha functional: " + functional);
  }

  auto point_of = [&](const nlohmann::json& pj) {
    PathPoint p;
    if (pj.is_number()) {
      CMatrix v(1, 1);
      v(0, 0) = pj.get<double>();
      p.state = v;
      p.label = pj.dump();
    } else if (pj.is_string()) {
      p.label = pj.get<std::string>();
      p.state = matrix_from_json(load_json(p.label));
    } else {
      p.label = pj.value("label", "");
      if (pj.contains("state")) p.state = matrix_from_json(load_json(pj.at("state").get<std::string>()));
    }
    return p;
  };

  HomotopyGrid grid;
  for (const auto& row : j.at("grid")) {
    std::vector<PathPoint> pts;
    for (const auto& pj : row) pts.push_back(point_of(pj));
    grid.rows.push_back(std::move(pts));
  }
  auto path_of_column = [&](bool last) {
    DiscretePath p;
    const std::size_t col = last ? grid.cols() - 1 : 0;
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
      p.params.push_back(grid.rows.size() == 1
                             ? 0.0
                             : static_cast<double>(r) / (grid.rows.size() - 1));
      p.points.push_back(grid.rows[r][col]);
    }
    return p;
  };
  const DiscretePath f0 = path_of_column(false);
  const DiscretePath f1 = path_of_column(true);
  const EquivalenceVerdict verdict = equivalence_check(grid, f0, f1, alpha);
  const char* text = verdict == EquivalenceVerdict::TwoWay     ? "two-way"
                     : verdict == EquivalenceVerdict::OneWayOnly ? "one-way-only"
                                                                 : "neither";
  emit({{"functional", alpha.name}, {"verdict", text}, {"scope", "discrete verdict"}}, out);
  return verdict == EquivalenceVerdict::Neither ? kDomainError : kOk;
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"finite-dimensional quantum fibration toolkit"};
  app.require_subcommand(1);

  RunManifest manifest;
  std::string out, out_dir = "out";
  app.add_option("--seed", manifest.seed, "PRNG seed");
  app.add_option("--tol", manifest.tol, "tolerance override");
  app.add_option("--out", out, "output file (default: stdout)");
  int jobs = 1;
  app.add_option("--jobs", jobs, "parallel jobs for sweeps");
  std::string format = "json";
  app.add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  // topology validate <file>
  auto* topology = app.add_subcommand("topology");
  std::string topo_file;
  auto* topo_validate = topology->add_subcommand("validate");
  topo_validate->add_option("file", topo_file)->required();

  // algebra commutant <file> | algebra orbit
  auto* algebra_cmd = app.add_subcommand("algebra");
  std::string alg_file, orbit_state, orbit_gates;
  int orbit_depth = 6;
  auto* alg_commutant = algebra_cmd->add_subcommand("commutant");
  alg_commutant->add_option("file", alg_file)->required();
  auto* alg_orbit = algebra_cmd->add_subcommand("orbit");
  alg_orbit->add_option("--state", orbit_state)->required();
  alg_orbit->add_option("--gates", orbit_gates)->required();
  alg_orbit->add_option("--depth", orbit_depth);

  // channel check <file>
  auto* channel = app.add_subcommand("channel");
  std::string channel_file;
  auto* channel_check = channel->add_subcommand("check");
  channel_check->add_option("file", channel_file)->required();

  // measure <functional> --state --cut
  auto* measure_cmd = app.add_subcommand("measure");
  std::string m_functional, m_state, m_cut, m_dims;
  bool m_bits = false;
  measure_cmd->add_option("functional", m_functional)->required();
  measure_cmd->add_option("--state", m_state)->required();
  measure_cmd->add_option("--cut", m_cut);
  measure_cmd->add_option("--dims", m_dims);
  measure_cmd->add_flag("--bits", m_bits, "report logarithms base 2");

  // classify --op --functional
  auto* classify = app.add_subcommand("classify");
  std::string c_op, c_functional = "negativity", c_dims, c_cut;
  classify->add_option("--op", c_op)->required();
  classify->add_option("--functional", c_functional);
  classify->add_option("--dims", c_dims);
  classify->add_option("--cut", c_cut);

  // fibration assemble <dir> | fibration fiber <dir> --open
  auto* fibration_cmd = app.add_subcommand("fibration");
  std::string f_dir, f_open;
  auto* f_assemble = fibration_cmd->add_subcommand("assemble");
  f_assemble->add_option("dir", f_dir)->required();
  auto* f_fiber = fibration_cmd->add_subcommand("fiber");
  f_fiber->add_option("dir", f_dir)->required();
  f_fiber->add_option("--open", f_open)->required();

  // polymer anneal <config> -o out/ | polymer evolve
  auto* polymer_cmd = app.add_subcommand("polymer");
  std::string p_config;
  auto* p_anneal = polymer_cmd->add_subcommand("anneal");
  p_anneal->add_option("config", p_config)->required();
  p_anneal->add_option("-o,--out-dir", out_dir);
  auto* p_evolve = polymer_cmd->add_subcommand("evolve");
  p_evolve->add_option("config", p_config)->required();
  p_evolve->add_option("-o,--out-dir", out_dir);

  // alpha check --grid --functional
  auto* alpha_cmd = app.add_subcommand("alpha");
  std::string a_grid, a_functional = "value";
  auto* a_check = alpha_cmd->add_subcommand("check");
  a_check->add_option("--grid", a_grid)->required();
  a_check->add_option("--functional", a_functional);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    manifest.out_dir = out_dir;
    if (topo_validate->parsed()) {
      manifest.subcommand = "topology validate";
      manifest.inputs = {topo_file};
      return detail::cmd_topology_validate(topo_file);
    }
    if (alg_commutant->parsed()) {
      manifest.subcommand = "algebra commutant";
      manifest.inputs = {alg_file};
      return detail::cmd_algebra_commutant(alg_file, out);
    }
    if (alg_orbit->parsed()) {
      manifest.subcommand = "algebra orbit";
      manifest.inputs = {orbit_state, orbit_gates};
      return detail::cmd_algebra_orbit(orbit_state, orbit_gates, orbit_depth,
                                       manifest.tol, out);
    }
    if (channel_check->parsed()) {
      manifest.subcommand = "channel check";
      manifest.inputs = {channel_file};
      return detail::cmd_channel_check(channel_file);
    }
    if (measure_cmd->parsed()) {
      manifest.subcommand = "measure " + m_functional;
      manifest.inputs = {m_state, m_cut, m_dims};
      return detail::cmd_measure(m_functional, m_state, m_cut, m_dims, m_bits,
                                 manifest.seed, manifest, out);
    }
    if (classify->parsed()) {
      manifest.subcommand = "classify";
      manifest.inputs = {c_op, c_functional, c_cut, c_dims};
      return detail::cmd_classify(c_op, c_functional, c_dims, c_cut, manifest.seed,
                                  manifest.tol, manifest, out);
    }
    if (f_assemble->parsed()) {
      manifest.subcommand = "fibration assemble";
      manifest.inputs = {f_dir};
      return detail::cmd_fibration_assemble(f_dir);
    }
    if (f_fiber->parsed()) {
      manifest.subcommand = "fibration fiber";
      manifest.inputs = {f_dir, f_open};
      return detail::cmd_fibration_fiber(f_dir, f_open, out);
    }
    if (p_anneal->parsed()) {
      manifest.subcommand = "polymer anneal";
      manifest.inputs = {p_config};
      return detail::cmd_polymer_anneal(p_config, manifest, out_dir);
    }
    if (p_evolve->parsed()) {
      manifest.subcommand = "polymer evolve";
      manifest.inputs = {p_config};
      return detail::cmd_polymer_evolve(p_config, manifest, out_dir);
    }
    if (a_check->parsed()) {
      manifest.subcommand = "alpha check";
      manifest.inputs = {a_grid, a_functional};
      return detail::cmd_alpha_check(a_grid, a_functional, out);
    }
    std::cerr << "no subcommand\n";
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace fibersim::cli

#endif  // FIBERSIM_CLI_HPP
