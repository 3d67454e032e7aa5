// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cpi/basis_io.hpp"
#include "cpi/cms.hpp"
#include "cpi/cpi_basis.hpp"
#include "cpi/fem.hpp"
#include "cpi/matrix_market.hpp"
#include "cpi/planner.hpp"

namespace cpi::bench {

// Flat key=value run description. Paths are relative to the manifest's directory.
struct Manifest {
  std::filesystem::path a_path;
  std::filesystem::path m_path;
  Index n1 = 0;
  double upper = 0;  // Lambda
  double eta = 1e-6;
  int dimension = 2;
  std::optional<double> exterior_volume;
  double tol = 0.0;
  double cost_exponent = 2.0;
  std::filesystem::path output_dir = ".";
  std::optional<double> h;
  double mass_constant = 1.0;
  std::optional<double> gamma;
  std::optional<int> points;
  std::optional<Index> track;

  static constexpr const char* kKeys[] = {"A",   "M", "n1",         "Lambda",        "eta", "d",     "vol_omega2", "tol",
                                          "r",   "output_dir", "h", "mass_constant", "gamma", "N", "track"};

  static bool known(const std::string& key) {
    return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; });
  }

  void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {}) {
    auto number = [&]() {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) throw Error(ErrorCode::ParseError, key + ": not a number: '" + value + "'");
      return v;
    };
    auto integer = [&]() {
      const double v = number();
      if (v != std::floor(v)) throw Error(ErrorCode::ParseError, key + ": not an integer: '" + value + "'");
      return static_cast<long long>(v);
    };
    auto path = [&]() { return base.empty() || std::filesystem::path(value).is_absolute() ? std::filesystem::path(value) : base / value; };
    if (key == "A") a_path = path();
    else if (key == "M") m_path = path();
    else if (key == "n1") n1 = static_cast<Index>(integer());
    else if (key == "Lambda") upper = number();
    else if (key == "eta") eta = number();
    else if (key == "d") dimension = static_cast<int>(integer());
    else if (key == "vol_omega2") exterior_volume = number();
    else if (key == "tol") tol = number();
    else if (key == "r") cost_exponent = number();
    else if (key == "output_dir") output_dir = path();
    else if (key == "h") h = number();
    else if (key == "mass_constant") mass_constant = number();
    else if (key == "gamma") gamma = number();
    else if (key == "N") points = static_cast<int>(integer());
    else if (key == "track") track = static_cast<Index>(integer());
    else throw Error(ErrorCode::ParseError, "unknown manifest key '" + key + "'");
  }

  static Manifest parse(std::istream& in, const std::string& name = "<manifest>",
                        const std::filesystem::path& base = {}) {
    Manifest m;
    std::map<std::string, bool> seen;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
      ++lineno;
      const std::string body = trim(line.substr(0, line.find('#')));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::ParseError, name + ":" + std::to_string(lineno) + ": expected key=value");
      }
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (seen[key]) throw Error(ErrorCode::ParseError, name + ":" + std::to_string(lineno) + ": duplicate key " + key);
      seen[key] = true;
      try {
        m.set(key, value, base);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, name + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    for (const char* required : {"A", "M", "n1", "Lambda"}) {
      if (!seen[required]) throw Error(ErrorCode::ParseError, name + ": missing required key " + required);
    }
    return m;
  }

  static Manifest load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    return parse(in, path.string(), path.parent_path());
  }

  void validate() const {
    if (n1 <= 0) throw Error(ErrorCode::ParseError, "n1 must be positive");
    if (!(upper > 0)) throw Error(ErrorCode::ParseError, "Lambda must be positive");
    if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::ParseError, "eta must lie in (0, 1)");
    if (dimension != 2 && dimension != 3) throw Error(ErrorCode::ParseError, "d must be 2 or 3");
    if (exterior_volume && !(*exterior_volume > 0)) throw Error(ErrorCode::ParseError, "vol_omega2 must be positive");
    if (tol < 0) throw Error(ErrorCode::ParseError, "tol must be non-negative");
    if (!(cost_exponent > 1 && cost_exponent < 3)) throw Error(ErrorCode::ParseError, "r must lie in (1, 3)");
    if (h && !(*h > 0)) throw Error(ErrorCode::ParseError, "h must be positive");
    if (gamma && !(*gamma > 1)) throw Error(ErrorCode::ParseError, "gamma must exceed 1");
    if (points && *points < 1) throw Error(ErrorCode::ParseError, "N must be at least 1");
  }

  void write(std::ostream& out) const {
    out << std::setprecision(17);
    out << "A = " << a_path.string() << "\nM = " << m_path.string() << "\nn1 = " << n1 << "\nLambda = " << upper
        << "\neta = " << eta << "\nd = " << dimension << "\ntol = " << tol << "\nr = " << cost_exponent
        << "\noutput_dir = " << output_dir.string() << "\nmass_constant = " << mass_constant << '\n';
    if (exterior_volume) out << "vol_omega2 = " << *exterior_volume << '\n';
    if (h) out << "h = " << *h << '\n';
    if (gamma) out << "gamma = " << *gamma << '\n';
    if (points) out << "N = " << *points << '\n';
    if (track) out << "track = " << *track << '\n';
  }
};

// Formats a number with 15 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

using Cell = std::variant<double, long long, std::string>;

// CSV with a versioned schema comment as its first line.
class CsvWriter {
 public:
  static constexpr const char* kSchema = "# cpi-bench csv v1 ";

  CsvWriter(std::ostream& out, const std::string& kind, std::vector<std::string> columns)
      : out_(out), width_(columns.size()) {
    out_ << kSchema << kind << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) throw Error(ErrorCode::DimensionMismatch, "CSV row width differs from the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) out_ << format_number(v);
            else out_ << v;
          },
          cells[i]);
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  std::size_t width_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// A loaded problem plus the settings that drive the experiments.
struct Workload {
  Manifest manifest;
  BlockPencil pencil;

  // Eigenvalues of the full pencil below Lambda unless the manifest fixes the count.
  Index tracked() const {
    if (manifest.track) return *manifest.track;
    return count_below(pencil.A().matrix(), pencil.M().matrix(), manifest.upper);
  }

  std::optional<MeshScale> mesh_scale() const {
    if (!manifest.h) return std::nullopt;
    return MeshScale{*manifest.h, manifest.dimension, manifest.mass_constant};
  }

  CpiPlan plan(double gamma, int points, double tol) const {
    const double alpha = default_alpha_bound(points, manifest.upper, pencil.M().matrix(), mesh_scale());
    return CpiPlan::make(manifest.upper, gamma, points, tol, alpha);
  }
};

inline Workload load_workload(const Manifest& manifest) {
  manifest.validate();
  return {manifest, build_pencil(mm::read_file(manifest.a_path), mm::read_file(manifest.m_path), manifest.n1)};
}

struct Reference {
  Vector values;
  std::string method;  // "dense" or "lanczos"
};

inline constexpr Index kDenseReferenceLimit = 2000;

// Reference eigenvalues of the full pencil: dense up to kDenseReferenceLimit, else Lanczos at 1e-11.
inline Reference reference_spectrum(const BlockPencil& pencil, Index count) {
  if (pencil.size() <= kDenseReferenceLimit) {
    const Vector all = dense_geneig_values(Matrix(pencil.A().matrix()), Matrix(pencil.M().matrix()));
    return {all.head(std::min(count, all.size())), "dense"};
  }
  LanczosOptions opts;
  opts.tol = 1e-11;
  return {lanczos_smallest(pencil.A(), pencil.M(), SpectrumRequest::smallest(count), opts).values, "lanczos"};
}

inline Vector relative_errors(const Vector& approx, const Vector& reference) {
  const Index n = std::min(approx.size(), reference.size());
  Vector e(n);
  for (Index i = 0; i < n; ++i) e(i) = std::abs(approx(i) - reference(i)) / reference(i);
  return e;
}

inline double max_relative_error(const Vector& approx, const Vector& reference) {
  if (approx.size() < reference.size()) return std::numeric_limits<double>::infinity();
  const Vector e = relative_errors(approx, reference);
  return e.size() ? e.maxCoeff() : 0.0;
}

// Weyl-law volume calibrated from the exact exterior count at the lowest
// level l = 2^k Lambda holding at least one exterior eigenvalue.
inline double calibrated_volume(const BlockPencil& pencil, double upper, int d) {
  double l = upper;
  for (int k = 0; k < 40; ++k, l *= 2.0) {
    double probe = l;
    Index count = 0;
    try {
      count = count_below(pencil, probe);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularShift) throw;
      probe *= 1.0 + 1e-9;
      count = count_below(pencil, probe);
    }
    if (count > 0) return static_cast<double>(count) / (planner::weyl_constant(d) * std::pow(probe, 0.5 * d));
  }
  throw Error(ErrorCode::NoRoot, "no exterior eigenvalue found for Weyl calibration");
}

inline planner::ProblemProfile profile(const Workload& w) {
  planner::ProblemProfile p;
  p.dimension = w.manifest.dimension;
  p.exterior_volume = w.manifest.exterior_volume
                          ? *w.manifest.exterior_volume
                          : calibrated_volume(w.pencil, w.manifest.upper, w.manifest.dimension);
  p.interface_rank = static_cast<double>(interface_rank(w.pencil));
  p.spectral_bound = w.manifest.upper;
  p.cost_exponent = w.manifest.cost_exponent;
  p.target = w.manifest.eta;
  return p;
}

struct ConvergenceRow {
  double gamma = 0;
  int points = 0;
  Index projector_rank = 0;
  Index dim = 0;
  Index index = 0;
  double reference = 0;
  double value = 0;
  double error = 0;
  double bound = 0;
};

inline std::vector<ConvergenceRow> run_convergence(const Workload& w, const Reference& ref,
                                                   const std::vector<double>& gammas, const std::vector<int>& points) {
  std::vector<ConvergenceRow> rows;
  const Index track = ref.values.size();
  for (double g : gammas) {
    for (int n : points) {
      const ReducedBasis basis = build_basis(w.pencil, w.plan(g, n, w.manifest.tol));
      const SpectralResult res = cpi_solve(w.pencil, basis, {.count = track});
      for (Index k = 0; k < track; ++k) {
        rows.push_back({g, basis.plan.points, basis.projector_rank, basis.dim(), k + 1, ref.values(k), res.values(k),
                        std::abs(res.values(k) - ref.values(k)) / ref.values(k), res.bound});
      }
    }
  }
  return rows;
}

inline void write_convergence(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  CsvWriter csv(out, "convergence", {"gamma", "N", "K", "dim_V2", "index", "reference", "cpi", "rel_error", "bound"});
  for (const auto& r : rows) {
    csv.row({r.gamma, static_cast<long long>(r.points), static_cast<long long>(r.projector_rank),
             static_cast<long long>(r.dim), static_cast<long long>(r.index), r.reference, r.value, r.error, r.bound});
  }
}

struct TruncationRow {
  double tol = 0;
  Index dim = 0;
  double error = 0;
  double bound = 0;  // untruncated bound for the plan
};

inline std::vector<TruncationRow> run_truncation(const Workload& w, const Reference& ref, double gamma, int points,
                                                 const std::vector<double>& tols) {
  std::vector<TruncationRow> rows;
  for (double tol : tols) {
    const ReducedBasis basis = build_basis(w.pencil, w.plan(gamma, points, tol));
    const SpectralResult res = cpi_solve(w.pencil, basis, {.count = ref.values.size()});
    rows.push_back({tol, basis.dim(), max_relative_error(res.values, ref.values), res.bound});
  }
  return rows;
}

struct CompareRow {
  double target = 0;  // target relative error, 0 in dimension mode
  Index dim = 0;
  bool cpi_feasible = false;
  double cpi_gamma = 0;
  int cpi_points = 0;
  double cpi_error = 0;
  double cms_error = 0;
};

inline double cms_error_at(const Workload& w, const Reference& ref, Index dim) {
  const CmsBasis cms = cms_build(w.pencil, std::min(dim, w.pencil.n2()));
  return max_relative_error(cms_solve(w.pencil, cms, w.manifest.upper, {.count = ref.values.size()}).values,
                            ref.values);
}

// Dimension mode: one plan (manifest gamma and N, default 4 and 6) whose SVD
// is cut to each target dimension d; infeasible when d < K or d exceeds the
// numerical rank of the untruncated basis.
inline std::vector<CompareRow> run_compare_dims(const Workload& w, const Reference& ref,
                                                const std::vector<Index>& dims) {
  const double gamma = w.manifest.gamma.value_or(4.0);
  const int points = w.manifest.points.value_or(6);
  const CpiPlan plan = w.plan(gamma, points, 0.0);
  const ReducedBasis full = build_basis(w.pencil, plan);
  std::vector<CompareRow> rows;
  for (Index d : dims) {
    CompareRow row;
    row.dim = d;
    if (d >= full.projector_rank && d <= full.dim()) {
      BuildOptions opts;
      opts.fixed_dim = d;
      const ReducedBasis b = build_basis(w.pencil, plan, opts);
      row.cpi_feasible = true;
      row.cpi_gamma = b.plan.gamma;
      row.cpi_points = b.plan.points;
      row.cpi_error = max_relative_error(cpi_solve(w.pencil, b, {.count = ref.values.size()}).values, ref.values);
    }
    row.cms_error = cms_error_at(w, ref, d);
    rows.push_back(row);
  }
  return rows;
}

// Planner for a target relative eigenvalue error eps: the bound equals
// 64 Lambda ntol(gamma, N) with unit constants and truncation adds 2 tol, so
// each term gets eps / 2, i.e. eta = eps / (256 Lambda) and tol = eps / 4.
inline std::pair<planner::OptimalParameters, double> plan_for_error(const planner::ProblemProfile& base, double eps) {
  planner::ProblemProfile p = base;
  p.target = eps / (256.0 * p.spectral_bound);
  return {planner::optimize_parameters(p), eps / 4.0};
}

// Target mode: CPI planned for each error level, CMS run at the resulting dim V2.
inline std::vector<CompareRow> run_compare_targets(const Workload& w, const Reference& ref,
                                                   const std::vector<double>& targets) {
  const planner::ProblemProfile prof = profile(w);
  std::vector<CompareRow> rows;
  for (double eps : targets) {
    const auto [opt, tol] = plan_for_error(prof, eps);
    const ReducedBasis b = build_basis(w.pencil, w.plan(opt.gamma, opt.points, tol));
    CompareRow row;
    row.target = eps;
    row.dim = b.dim();
    row.cpi_feasible = true;
    row.cpi_gamma = b.plan.gamma;
    row.cpi_points = b.plan.points;
    row.cpi_error = max_relative_error(cpi_solve(w.pencil, b, {.count = ref.values.size()}).values, ref.values);
    row.cms_error = cms_error_at(w, ref, row.dim);
    rows.push_back(row);
  }
  return rows;
}

inline void write_compare(std::ostream& out, const std::vector<CompareRow>& rows) {
  CsvWriter csv(out, "compare-cms", {"target_error", "dim_V2", "cpi_status", "cpi_gamma", "cpi_N",
                                     "cpi_max_rel_error", "cms_max_rel_error"});
  for (const auto& r : rows) {
    const Cell target = r.target > 0 ? Cell{r.target} : Cell{std::string("")};
    if (r.cpi_feasible) {
      csv.row({target, static_cast<long long>(r.dim), std::string("ok"), r.cpi_gamma,
               static_cast<long long>(r.cpi_points), r.cpi_error, r.cms_error});
    } else {
      csv.row({target, static_cast<long long>(r.dim), std::string("infeasible"), std::string(""), std::string(""),
               std::string(""), r.cms_error});
    }
  }
}

struct TimingRow {
  int repeat = 0;
  double basis = 0;
  double reduce = 0;
  double reduced_solve = 0;
  double full_solve = 0;
};

inline std::vector<TimingRow> run_timing(const Workload& w, double gamma, int points, int repeats) {
  if (repeats < 3) throw Error(ErrorCode::DomainError, "timing needs at least 3 repeats");
  const Index track = w.tracked();
  std::vector<TimingRow> rows;
  LanczosOptions lopts;
  lopts.tol = 1e-11;
  for (int rep = 0; rep < repeats; ++rep) {
    TimingRow row;
    row.repeat = rep + 1;
    Stopwatch t_basis;
    const ReducedBasis basis = build_basis(w.pencil, w.plan(gamma, points, w.manifest.tol));
    row.basis = t_basis.seconds();
    Stopwatch t_reduce;
    const BlockPencil reduced =
        recycle_reduced_blocks(basis.exterior, w.pencil.A11(), w.pencil.M11(), w.pencil.A12(), w.pencil.M12());
    row.reduce = t_reduce.seconds();
    Stopwatch t_solve;
    const EigenPairSet red = solve_reduced(reduced, SpectrumRequest::smallest(track), lopts);
    row.reduced_solve = t_solve.seconds();
    Stopwatch t_full;
    const EigenPairSet full = lanczos_smallest(w.pencil.A(), w.pencil.M(), SpectrumRequest::smallest(track), lopts);
    row.full_solve = t_full.seconds();
    if (red.size() != track || full.size() != track) throw Error(ErrorCode::ConvergenceFailure, "timing solve incomplete");
    rows.push_back(row);
  }
  return rows;
}

struct TimingSummary {
  double basis = 0;
  double reduce = 0;
  double reduced_solve = 0;
  double full_solve = 0;
  double speedup = 0;  // full solve over reduce + reduced solve
  double spread = 0;   // relative spread (max - min) / median of the reduced phases
};

inline TimingSummary summarize(const std::vector<TimingRow>& rows) {
  auto column = [&](auto field) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(field(r));
    return v;
  };
  TimingSummary s;
  s.basis = median(column([](const TimingRow& r) { return r.basis; }));
  s.reduce = median(column([](const TimingRow& r) { return r.reduce; }));
  s.reduced_solve = median(column([](const TimingRow& r) { return r.reduced_solve; }));
  s.full_solve = median(column([](const TimingRow& r) { return r.full_solve; }));
  s.speedup = s.full_solve / (s.reduce + s.reduced_solve);
  const auto online = column([](const TimingRow& r) { return r.reduce + r.reduced_solve; });
  const auto [lo, hi] = std::minmax_element(online.begin(), online.end());
  s.spread = (*hi - *lo) / median(online);
  return s;
}

inline void write_timing(std::ostream& out, const std::vector<TimingRow>& rows) {
  CsvWriter csv(out, "timing", {"phase", "repeat", "seconds"});
  for (const auto& r : rows) {
    csv.row({std::string("basis"), static_cast<long long>(r.repeat), r.basis});
    csv.row({std::string("reduce"), static_cast<long long>(r.repeat), r.reduce});
    csv.row({std::string("reduced_solve"), static_cast<long long>(r.repeat), r.reduced_solve});
    csv.row({std::string("full_solve"), static_cast<long long>(r.repeat), r.full_solve});
  }
  const TimingSummary s = summarize(rows);
  csv.row({std::string("median_basis"), 0LL, s.basis});
  csv.row({std::string("median_reduce"), 0LL, s.reduce});
  csv.row({std::string("median_reduced_solve"), 0LL, s.reduced_solve});
  csv.row({std::string("median_full_solve"), 0LL, s.full_solve});
  csv.row({std::string("speedup"), 0LL, s.speedup});
  csv.row({std::string("online_spread"), 0LL, s.spread});
}

struct RecyclingReport {
  std::vector<Vector> recycled;
  std::vector<Vector> fresh;
  double recycled_seconds = 0;
  double fresh_seconds = 0;
  std::uint64_t recycled_projections = 0;  // exterior projections formed during the recycled solves
};

// Solves every version twice: once reusing a single basis, once rebuilding the basis per version.
inline RecyclingReport run_recycling(const std::vector<BlockPencil>& versions, const CpiPlan& plan, Index track) {
  RecyclingReport rep;
  SolveOptions so{.count = track};
  {
    Stopwatch t;
    const ReducedBasis basis = build_basis(versions.front(), plan);
    const std::uint64_t before = stats::exterior_projections.load();
    for (const auto& v : versions) rep.recycled.push_back(cpi_solve(v, basis, so).values);
    rep.recycled_projections = stats::exterior_projections.load() - before;
    rep.recycled_seconds = t.seconds();
  }
  {
    Stopwatch t;
    for (const auto& v : versions) rep.fresh.push_back(cpi_solve(v, build_basis(v, plan), so).values);
    rep.fresh_seconds = t.seconds();
  }
  return rep;
}

inline void write_eigenvalues(std::ostream& out, const std::vector<std::string>& labels, const std::vector<Vector>& values,
                              const std::vector<Vector>& residuals) {
  CsvWriter csv(out, "eigenvalues", {"version", "index", "eigenvalue", "residual"});
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (Index k = 0; k < values[v].size(); ++k) {
      csv.row({labels[v], static_cast<long long>(k + 1), values[v](k), residuals[v](k)});
    }
  }
}

// Writes A.mtx, M.mtx and manifest.txt for a generated FEM problem.
inline Manifest export_problem(const fem::FemProblem& prob, const std::filesystem::path& dir, double upper,
                               std::optional<Index> track = std::nullopt) {
  std::filesystem::create_directories(dir);
  mm::write_file(dir / "A.mtx", prob.pencil.A());
  mm::write_file(dir / "M.mtx", prob.pencil.M());
  Manifest m;
  m.a_path = "A.mtx";
  m.m_path = "M.mtx";
  m.n1 = prob.pencil.n1();
  m.upper = upper;
  m.dimension = 2;
  m.exterior_volume = prob.exterior_area();
  m.h = prob.h;
  m.track = track;
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir.string());
  m.write(out);
  m.a_path = dir / "A.mtx";
  m.m_path = dir / "M.mtx";
  m.output_dir = dir;
  return m;
}

// Lambda midway between the k-th and (k+1)-th eigenvalue of a pencil.
inline double window_between(const BlockPencil& pencil, Index k) {
  const Reference ref = reference_spectrum(pencil, k + 1);
  return 0.5 * (ref.values(k - 1) + ref.values(k));
}

}  // namespace cpi::bench
