// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpi/cpi.hpp"

namespace fs = std::filesystem;
using namespace cpi;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

// Manifest keys reachable as command-line flags.
const std::vector<std::pair<std::string, std::string>> kOverrideFlags = {
    {"--stiffness", "A"},   {"--mass", "M"},       {"--n1", "n1"},
    {"--lambda", "Lambda"}, {"--eta", "eta"},      {"--dimension", "d"},
    {"--vol-omega2", "vol_omega2"}, {"--tol", "tol"}, {"--cost-exponent", "r"},
    {"--output-dir", "output_dir"}, {"--mesh-width", "h"},  {"--mass-constant", "mass_constant"},
    {"--gamma", "gamma"},   {"--points", "N"},     {"--track", "track"},
};

struct ManifestArgs {
  std::string path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("-m,--manifest", path, "Manifest file (key=value)")->required();
    for (const auto& [flag, key] : kOverrideFlags) {
      app->add_option(flag, overrides[key], "Override manifest key " + key);
    }
    app->add_option("--set", sets, "Override any manifest key: key=value");
  }

  bench::Manifest load() const {
    bench::Manifest m = bench::Manifest::load(path);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) m.set(key, value);
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "--set expects key=value, got '" + kv + "'");
      m.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    m.validate();
    return m;
  }
};

// Writes to the named file, or stdout when the name is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::IoError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::pair<double, int> choose_parameters(const bench::Workload& w) {
  if (w.manifest.gamma && w.manifest.points) return {*w.manifest.gamma, *w.manifest.points};
  const planner::OptimalParameters opt = planner::optimize_parameters(bench::profile(w));
  return {w.manifest.gamma.value_or(opt.gamma), w.manifest.points.value_or(opt.points)};
}

int cmd_plan(const ManifestArgs& args) {
  const bench::Workload w = bench::load_workload(args.load());
  const planner::ProblemProfile prof = bench::profile(w);
  const planner::OptimalParameters opt = planner::optimize_parameters(prof);
  const double k_hat = planner::weyl_count(prof.dimension, prof.exterior_volume, opt.gamma * prof.spectral_bound);
  std::cout << "n_gamma=" << static_cast<long long>(prof.interface_rank) << '\n'
            << "vol_omega2=" << bench::format_number(prof.exterior_volume) << '\n'
            << "gamma=" << bench::format_number(opt.gamma) << '\n'
            << "N=" << opt.points << '\n'
            << "ntol=" << bench::format_number(opt.ntol) << '\n'
            << "bound=" << bench::format_number(planner::theoretical_bound(prof.spectral_bound, opt.gamma, opt.points))
            << '\n'
            << "predicted_K=" << bench::format_number(k_hat) << '\n'
            << "predicted_dim_V2=" << bench::format_number(k_hat + prof.interface_rank * opt.points) << '\n';
  return 0;
}

int cmd_build_basis(const ManifestArgs& args, const std::string& out_path, const std::string& mode) {
  const bench::Workload w = bench::load_workload(args.load());
  const auto [gamma, points] = choose_parameters(w);
  CpiPlan plan = w.plan(gamma, points, w.manifest.tol);
  if (mode == "dense") plan.mode = BasisMode::Dense;
  else if (mode == "matrix-free") plan.mode = BasisMode::MatrixFree;
  const ReducedBasis basis = build_basis(w.pencil, plan);
  const fs::path path = out_path.empty() ? w.manifest.output_dir / "basis.cpib" : fs::path(out_path);
  io::save_basis(path, basis);
  std::cout << "basis=" << path.string() << '\n'
            << "gamma=" << bench::format_number(basis.plan.gamma) << '\n'
            << "N=" << basis.plan.points << '\n'
            << "K=" << basis.projector_rank << '\n'
            << "r=" << basis.coupling_count << '\n'
            << "columns=" << basis.sample_columns << '\n'
            << "K_c=" << basis.dim() << '\n'
            << "mode=" << to_string(basis.mode) << '\n'
            << "sigma_head=";
  for (Index i = 0; i < std::min<Index>(5, basis.sigma.size()); ++i) {
    std::cout << (i ? ";" : "") << bench::format_number(basis.sigma(i));
  }
  std::cout << '\n';
  return 0;
}

int cmd_solve(const ManifestArgs& args, const std::string& basis_path, const std::vector<std::string>& versions,
              const std::string& csv_path) {
  const bench::Manifest base = args.load();
  const ReducedBasis basis = io::load_basis(basis_path);
  std::vector<std::string> labels;
  std::vector<bench::Workload> loads;
  if (versions.empty()) {
    labels.push_back("base");
    loads.push_back(bench::load_workload(base));
  }
  for (const auto& v : versions) {
    labels.push_back(fs::path(v).parent_path().filename().string() + "/" + fs::path(v).filename().string());
    loads.push_back(bench::load_workload(bench::Manifest::load(v)));
  }
  SolveOptions so;
  if (base.track) so.count = *base.track;
  std::vector<Vector> values, residuals;
  for (const auto& w : loads) {
    const SpectralResult r = cpi_solve(w.pencil, basis, so);
    values.push_back(r.values);
    residuals.push_back(r.residuals);
  }
  Output out(csv_path);
  bench::write_eigenvalues(out.stream(), labels, values, residuals);
  return 0;
}

template <class T>
std::vector<T> or_default(const std::vector<T>& given, std::vector<T> fallback) {
  return given.empty() ? fallback : given;
}

int cmd_convergence(const ManifestArgs& args, const std::vector<double>& gammas, const std::vector<int>& points,
                    const std::string& csv_path) {
  const bench::Workload w = bench::load_workload(args.load());
  const bench::Reference ref = bench::reference_spectrum(w.pencil, w.tracked());
  const auto rows = bench::run_convergence(w, ref, or_default(gammas, {2.5}), or_default(points, {1, 2, 3, 4, 5, 6}));
  Output out(csv_path);
  out.stream() << "# reference=" << ref.method << '\n';
  bench::write_convergence(out.stream(), rows);
  return 0;
}

int cmd_compare(const ManifestArgs& args, const std::vector<Index>& dims, const std::vector<double>& targets,
                const std::string& csv_path) {
  const bench::Workload w = bench::load_workload(args.load());
  const bench::Reference ref = bench::reference_spectrum(w.pencil, w.tracked());
  const auto rows = dims.empty()
                        ? bench::run_compare_targets(
                              w, ref, or_default(targets, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10}))
                        : bench::run_compare_dims(w, ref, dims);
  Output out(csv_path);
  out.stream() << "# reference=" << ref.method << '\n';
  bench::write_compare(out.stream(), rows);
  return 0;
}

int cmd_timing(const ManifestArgs& args, int repeats, const std::string& csv_path) {
  const bench::Workload w = bench::load_workload(args.load());
  const double gamma = w.manifest.gamma.value_or(2.5);
  const int points = w.manifest.points.value_or(3);
  const auto rows = bench::run_timing(w, gamma, points, repeats);
  Output out(csv_path);
  bench::write_timing(out.stream(), rows);
  return 0;
}

int cmd_fem_gen(const std::string& out_dir, const std::string& geometry, int refine, int track, int versions,
                std::uint64_t seed) {
  fem::FemProblem prob;
  if (geometry == "desk") prob = fem::desk_rectangle(refine);
  else if (geometry == "corner") prob = fem::corner_rectangle(refine);
  else if (geometry == "unit-square") prob = fem::unit_square(32 * refine);
  else throw Error(ErrorCode::ParseError, "unknown geometry '" + geometry + "'");
  const double upper = bench::window_between(prob.pencil, track);
  bench::export_problem(prob, out_dir, upper, track);
  std::cout << "n=" << prob.pencil.size() << '\n'
            << "n1=" << prob.pencil.n1() << '\n'
            << "n_gamma=" << prob.interface_dofs << '\n'
            << "Lambda=" << bench::format_number(upper) << '\n'
            << "manifest=" << (fs::path(out_dir) / "manifest.txt").string() << '\n';
  if (versions > 0) {
    const auto list = fem::make_versions(prob, {.seed = seed}, versions);
    for (std::size_t v = 0; v < list.size(); ++v) {
      const fs::path dir = fs::path(out_dir) / ("version" + std::to_string(v + 1));
      bench::export_problem(list[v], dir, upper, track);
      std::cout << "version=" << (dir / "manifest.txt").string() << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condensed pole interpolation: planning, basis construction, reduced solves and benchmarks"};
  app.require_subcommand(1);

  ManifestArgs plan_args, build_args, solve_args, conv_args, cmp_args, timing_args;

  auto* plan = app.add_subcommand("plan", "Choose gamma and N for the manifest's target");
  plan_args.attach(plan);

  std::string basis_out, mode = "auto";
  auto* build = app.add_subcommand("build-basis", "Build and serialize the reduced exterior basis");
  build_args.attach(build);
  build->add_option("-o,--out", basis_out, "Basis file (default output_dir/basis.cpib)");
  build->add_option("--mode", mode, "auto, dense or matrix-free")->check(CLI::IsMember({"auto", "dense", "matrix-free"}));

  std::string basis_in, solve_csv;
  std::vector<std::string> versions;
  auto* solve = app.add_subcommand("solve", "Solve reduced problems for one or more versions");
  solve_args.attach(solve);
  solve->add_option("-b,--basis", basis_in, "Basis file")->required()->check(CLI::ExistingFile);
  solve->add_option("--version", versions, "Manifest of a version sharing the exterior")->check(CLI::ExistingFile);
  solve->add_option("--csv", solve_csv, "CSV output file (default stdout)");

  std::vector<double> gammas;
  std::vector<int> points;
  std::string conv_csv;
  auto* conv = app.add_subcommand("convergence", "Relative errors against the reference spectrum");
  conv_args.attach(conv);
  conv->add_option("--gammas", gammas, "Oversampling factors")->delimiter(',');
  conv->add_option("--point-counts", points, "Interpolation point counts")->delimiter(',');
  conv->add_option("--csv", conv_csv, "CSV output file (default stdout)");

  std::vector<Index> dims;
  std::vector<double> targets;
  std::string cmp_csv;
  auto* cmp = app.add_subcommand("compare-cms", "CPI against component mode synthesis at matched dim V2");
  cmp_args.attach(cmp);
  cmp->add_option("--dims", dims, "Target exterior dimensions (fixed plan, SVD cut)")->delimiter(',');
  cmp->add_option("--targets", targets, "Target relative errors (planned CPI)")->delimiter(',');
  cmp->add_option("--csv", cmp_csv, "CSV output file (default stdout)");

  int repeats = 5;
  std::string timing_csv;
  auto* timing = app.add_subcommand("timing", "Phase timings of reduced and full solves");
  timing_args.attach(timing);
  timing->add_option("--repeats", repeats, "Repetitions (at least 3)")->check(CLI::Range(3, 1000));
  timing->add_option("--csv", timing_csv, "CSV output file (default stdout)");

  std::string gen_out, geometry = "desk";
  int refine = 1, track = 15, n_versions = 0;
  std::uint64_t seed = 1;
  auto* gen = app.add_subcommand("fem-gen", "Generate a FEM test problem as Matrix Market files and a manifest");
  gen->add_option("-o,--out", gen_out, "Output directory")->required();
  gen->add_option("--geometry", geometry, "desk, corner or unit-square")
      ->check(CLI::IsMember({"desk", "corner", "unit-square"}));
  gen->add_option("--refine", refine, "Mesh refinement factor")->check(CLI::Range(1, 16));
  gen->add_option("--track", track, "Eigenvalues below Lambda")->check(CLI::Range(1, 1000));
  gen->add_option("--versions", n_versions, "Interior-perturbed versions to write")->check(CLI::Range(0, 1000));
  gen->add_option("--seed", seed, "Seed for version perturbations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(plan_args);
    if (*build) return cmd_build_basis(build_args, basis_out, mode);
    if (*solve) return cmd_solve(solve_args, basis_in, versions, solve_csv);
    if (*conv) return cmd_convergence(conv_args, gammas, points, conv_csv);
    if (*cmp) return cmd_compare(cmp_args, dims, targets, cmp_csv);
    if (*timing) return cmd_timing(timing_args, repeats, timing_csv);
    if (*gen) return cmd_fem_gen(gen_out, geometry, refine, track, n_versions, seed);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitUsage : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
