// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"

using namespace cpi;
using namespace cpi::bench;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cpi::Error thrown";
  return ErrorCode::IoError;
}

std::string parse_error_message(const std::string& text) {
  std::istringstream in(text);
  try {
    Manifest::parse(in, "m.txt");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "manifest accepted:\n" << text;
  return {};
}

std::string golden_header(const std::string& kind) {
  std::ifstream in(fs::path(CPI_GOLDEN_DIR) / (kind + ".csv"));
  std::string schema, columns;
  std::getline(in, schema);
  std::getline(in, columns);
  return schema + '\n' + columns + '\n';
}

std::string header_of(const std::string& text) {
  std::istringstream in(text);
  std::string schema, columns;
  std::getline(in, schema);
  std::getline(in, columns);
  return schema + '\n' + columns + '\n';
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cpi_bench_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kMinimal = "A = a.mtx\nM = m.mtx\nn1 = 3\nLambda = 10\n";

ReducedBasis small_basis(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const BlockPencil p = oracle::random_pencil(40, 12, rng);
  return build_basis(p, CpiPlan::make(oracle::gap_after(oracle::dense_eigenvalues(p), 3), 2.0, 2, 0.0));
}

}  // namespace

TEST(ManifestTest, ParsesKeysCommentsAndDefaults) {
  std::istringstream in("# run\nA = a.mtx\nM=m.mtx  # mass\n\nn1 = 620\nLambda = 167.5\neta=1e-8\nd = 3\ntrack = 15\n");
  const Manifest m = Manifest::parse(in);
  EXPECT_EQ(m.a_path, "a.mtx");
  EXPECT_EQ(m.m_path, "m.mtx");
  EXPECT_EQ(m.n1, 620);
  EXPECT_DOUBLE_EQ(m.upper, 167.5);
  EXPECT_DOUBLE_EQ(m.eta, 1e-8);
  EXPECT_EQ(m.dimension, 3);
  EXPECT_EQ(m.track, 15);
  EXPECT_FALSE(m.exterior_volume);
  EXPECT_DOUBLE_EQ(m.cost_exponent, 2.0);
  EXPECT_DOUBLE_EQ(m.tol, 0.0);
}

TEST(ManifestTest, ParseErrorsNameTheLine) {
  EXPECT_NE(parse_error_message(std::string(kMinimal) + "oops\n").find("m.txt:5"), std::string::npos);
  EXPECT_NE(parse_error_message(std::string(kMinimal) + "n1 = 4\n").find("duplicate"), std::string::npos);
  EXPECT_NE(parse_error_message(std::string(kMinimal) + "colour = red\n").find("unknown"), std::string::npos);
  EXPECT_NE(parse_error_message(std::string(kMinimal) + "eta = small\n").find("not a number"), std::string::npos);
  EXPECT_NE(parse_error_message(std::string(kMinimal) + "N = 2.5\n").find("not an integer"), std::string::npos);
  EXPECT_NE(parse_error_message("A = a\nM = m\nn1 = 3\n").find("Lambda"), std::string::npos);
}

TEST(ManifestTest, PathsResolveAgainstTheManifest) {
  const fs::path dir = scratch("paths");
  {
    std::ofstream out(dir / "manifest.txt");
    out << kMinimal << "output_dir = out\n";
  }
  const Manifest m = Manifest::load(dir / "manifest.txt");
  EXPECT_EQ(m.a_path, dir / "a.mtx");
  EXPECT_EQ(m.output_dir, dir / "out");
  EXPECT_EQ(code_of([&] { Manifest::load(dir / "missing.txt"); }), ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST(ManifestTest, Validation) {
  auto invalid = [](const std::string& extra) {
    std::istringstream in(std::string(kMinimal) + extra);
    const Manifest m = Manifest::parse(in);
    return code_of([&] { m.validate(); });
  };
  EXPECT_EQ(invalid("eta = 2\n"), ErrorCode::ParseError);
  EXPECT_EQ(invalid("d = 4\n"), ErrorCode::ParseError);
  EXPECT_EQ(invalid("r = 3\n"), ErrorCode::ParseError);
  EXPECT_EQ(invalid("gamma = 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(invalid("N = 0\n"), ErrorCode::ParseError);
  EXPECT_EQ(invalid("tol = -1\n"), ErrorCode::ParseError);
  EXPECT_EQ(invalid("h = 0\n"), ErrorCode::ParseError);
}

TEST(ManifestTest, WriteParseRoundTrip) {
  std::istringstream in(std::string(kMinimal) + "vol_omega2 = 0.875\nh = 0.03125\ngamma = 2.5\nN = 3\ntrack = 15\n");
  const Manifest m = Manifest::parse(in);
  std::stringstream buf;
  m.write(buf);
  const Manifest back = Manifest::parse(buf);
  EXPECT_EQ(back.a_path, m.a_path);
  EXPECT_EQ(back.n1, m.n1);
  EXPECT_EQ(back.upper, m.upper);
  EXPECT_EQ(back.exterior_volume, m.exterior_volume);
  EXPECT_EQ(back.h, m.h);
  EXPECT_EQ(back.gamma, m.gamma);
  EXPECT_EQ(back.points, m.points);
  EXPECT_EQ(back.track, m.track);
  EXPECT_EQ(back.eta, m.eta);
}

TEST(Csv, HeadersMatchGoldenFiles) {
  std::ostringstream conv, cmp, timing, eig;
  write_convergence(conv, {});
  write_compare(cmp, {});
  write_eigenvalues(eig, {}, {}, {});
  EXPECT_EQ(conv.str(), golden_header("convergence"));
  EXPECT_EQ(cmp.str(), golden_header("compare-cms"));
  EXPECT_EQ(eig.str(), golden_header("eigenvalues"));
  std::vector<TimingRow> rows{{1, 1, 1, 1, 2}, {2, 1, 1, 1, 2}, {3, 1, 1, 1, 2}};
  write_timing(timing, rows);
  EXPECT_EQ(header_of(timing.str()), golden_header("timing"));
}

TEST(Csv, RowsAndWidthCheck) {
  std::ostringstream out;
  CsvWriter csv(out, "demo", {"a", "b", "c"});
  csv.row({0.1, 7LL, std::string("x")});
  EXPECT_EQ(out.str(), "# cpi-bench csv v1 demo\na,b,c\n0.1,7,x\n");
  EXPECT_EQ(code_of([&] { csv.row({1.0}); }), ErrorCode::DimensionMismatch);
}

TEST(Csv, CompareRowsMarkInfeasiblePlans) {
  std::ostringstream out;
  CompareRow ok{1e-3, 50, true, 2.5, 3, 1e-5, 1e-2};
  CompareRow bad{0.0, 10, false, 0, 0, 0, 0.5};
  write_compare(out, {ok, bad});
  EXPECT_NE(out.str().find("0.001,50,ok,2.5,3,1e-05,0.01"), std::string::npos);
  EXPECT_NE(out.str().find(",10,infeasible,,,,0.5"), std::string::npos);
}

TEST(Numbers, FormatAndMedian) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(167.46319808395248), "167.463198083952");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(median({}), 0.0);
}

TEST(Errors, RelativeErrors) {
  Vector approx(3), ref(3);
  approx << 1.1, 2.0, 2.97;
  ref << 1.0, 2.0, 3.0;
  const Vector e = relative_errors(approx, ref);
  EXPECT_NEAR(e(0), 0.1, 1e-15);
  EXPECT_EQ(e(1), 0.0);
  EXPECT_NEAR(e(2), 0.01, 1e-15);
  EXPECT_NEAR(max_relative_error(approx, ref), 0.1, 1e-15);
  EXPECT_TRUE(std::isinf(max_relative_error(approx.head(2), ref)));
}

TEST(Reference, DenseSpectrumAndWindow) {
  std::mt19937_64 rng(81);
  const BlockPencil p = oracle::random_pencil(50, 10, rng);
  const Vector all = oracle::dense_eigenvalues(p);
  const Reference ref = reference_spectrum(p, 6);
  EXPECT_EQ(ref.method, "dense");
  EXPECT_LE(oracle::max_relative_deviation(ref.values, all.head(6)), 1e-12);
  EXPECT_NEAR(window_between(p, 6), 0.5 * (all(5) + all(6)), 1e-12 * all(6));
}

TEST(Export, RoundTripIsBitwise) {
  const fem::FemProblem prob = fem::corner_rectangle();
  const fs::path dir = scratch("export");
  export_problem(prob, dir, 100.0, 5);
  const Workload w = load_workload(Manifest::load(dir / "manifest.txt"));
  EXPECT_TRUE(identical(w.pencil.A().matrix(), prob.pencil.A().matrix()));
  EXPECT_TRUE(identical(w.pencil.M().matrix(), prob.pencil.M().matrix()));
  EXPECT_EQ(w.pencil.n1(), prob.pencil.n1());
  EXPECT_EQ(w.tracked(), 5);
  EXPECT_DOUBLE_EQ(*w.manifest.h, prob.h);
  EXPECT_DOUBLE_EQ(*w.manifest.exterior_volume, prob.exterior_area());
  fs::remove_all(dir);
}

TEST(Calibration, VolumeFromExteriorCount) {
  const fem::FemProblem prob = fem::desk_rectangle();
  const double upper = 167.46319808395248;
  const double vol = calibrated_volume(prob.pencil, upper, 2);
  const double count = static_cast<double>(count_below(prob.pencil, upper));
  ASSERT_GT(count, 0);
  EXPECT_NEAR(vol * planner::weyl_constant(2) * upper, count, 1e-9 * count);
  EXPECT_GT(vol, 0.5 * prob.exterior_area());
  EXPECT_LT(vol, 2.0 * prob.exterior_area());
}

TEST(BasisIo, RoundTrip) {
  const ReducedBasis b = small_basis(82);
  std::stringstream buf;
  io::write_basis(buf, b);
  const ReducedBasis back = io::read_basis(buf);
  EXPECT_EQ(back.q(), b.q());
  EXPECT_EQ(*back.exterior.stiffness, *b.exterior.stiffness);
  EXPECT_EQ(*back.exterior.mass, *b.exterior.mass);
  EXPECT_EQ(back.sigma, b.sigma);
  EXPECT_EQ(back.plan.xi, b.plan.xi);
  EXPECT_EQ(back.plan.gamma, b.plan.gamma);
  EXPECT_EQ(back.projector_rank, b.projector_rank);
  EXPECT_EQ(back.sample_columns, b.sample_columns);
  EXPECT_TRUE(identical(*back.a22, *b.a22));
  std::stringstream again;
  io::write_basis(again, back);
  EXPECT_EQ(again.str(), buf.str());
}

TEST(BasisIo, CorruptInput) {
  const ReducedBasis b = small_basis(83);
  std::stringstream buf;
  io::write_basis(buf, b);
  const std::string bytes = buf.str();
  auto read = [](const std::string& data) {
    std::istringstream in(data);
    return code_of([&] { io::read_basis(in); });
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(read(bad_magic), ErrorCode::ParseError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(read(bad_version), ErrorCode::ParseError);
  EXPECT_EQ(read(bytes.substr(0, bytes.size() / 2)), ErrorCode::ParseError);
  EXPECT_EQ(read(""), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::load_basis("/nonexistent/cpi/basis.cpib"); }), ErrorCode::IoError);
}

TEST(BasisIo, FileRoundTrip) {
  const ReducedBasis b = small_basis(84);
  const fs::path dir = scratch("basis");
  io::save_basis(dir / "b.cpib", b);
  EXPECT_EQ(io::load_basis(dir / "b.cpib").q(), b.q());
  fs::remove_all(dir);
}

TEST(Recycling, SharedBasisMatchesRebuild) {
  const fem::FemProblem base = fem::corner_rectangle();
  const auto versions = fem::make_versions(base, {.seed = 3}, 3);
  std::vector<BlockPencil> pencils;
  for (const auto& v : versions) pencils.push_back(v.pencil);
  const double upper = window_between(pencils.front(), 8);
  const RecyclingReport rep = run_recycling(pencils, CpiPlan::make(upper, 2.5, 3, 0.0), 8);
  ASSERT_EQ(rep.recycled.size(), 3u);
  EXPECT_EQ(rep.recycled_projections, 0u);
  for (std::size_t v = 0; v < 3; ++v) {
    EXPECT_EQ(rep.recycled[v], rep.fresh[v]) << v;
    const Vector ref = oracle::dense_eigenvalues(pencils[v]).head(8);
    EXPECT_LE(oracle::max_relative_deviation(rep.recycled[v], ref), 1e-8);
  }
  EXPECT_LT(rep.recycled_seconds, rep.fresh_seconds);
}

TEST(Timing, CornerReducedSolveIsFaster) {
  const fem::FemProblem prob = fem::corner_rectangle();
  Workload w;
  w.pencil = prob.pencil;
  w.manifest.n1 = prob.pencil.n1();
  w.manifest.upper = window_between(prob.pencil, 15);
  w.manifest.h = prob.h;
  w.manifest.track = 15;
  const auto rows = run_timing(w, 2.5, 3, 5);
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    EXPECT_GT(r.basis, 0.0);
    EXPECT_GT(r.reduce, 0.0);
    EXPECT_GT(r.reduced_solve, 0.0);
    EXPECT_GT(r.full_solve, 0.0);
  }
  EXPECT_GT(summarize(rows).speedup, 1.5);
  EXPECT_EQ(code_of([&] { run_timing(w, 2.5, 3, 2); }), ErrorCode::DomainError);
}
