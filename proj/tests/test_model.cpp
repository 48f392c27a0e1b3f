#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "polyq/io.hpp"
#include "polyq/system.hpp"
#include "support.hpp"

using Catch::Approx;
using namespace polyq;

namespace {

PolytopicSystem scalar_fixture() {
  PolytopicSystem sys;
  sys.name = "scalar-worked-example";
  sys.strictly_polytopic = true;
  sys.A = {Matrix{{0.5}}, Matrix{{2.0}}};
  sys.B = Matrix{{1.0}};
  sys.C = Matrix{{1.0}};
  return sys;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "polyq_model_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("SimplexPoint validation", "[model]") {
  REQUIRE_NOTHROW(SimplexPoint(Vec{0.25, 0.75}));
  REQUIRE_NOTHROW(SimplexPoint(Vec{1.0}));

  // tiny negatives clamp to zero
  const SimplexPoint p(Vec{1.0, -1e-13});
  REQUIRE(p[1] == 0.0);
  REQUIRE(p[0] == 1.0);

  REQUIRE_THROWS_AS(SimplexPoint(Vec{0.5, 0.6}), InvalidInputError);
  REQUIRE_THROWS_AS(SimplexPoint(Vec{-0.1, 1.1}), InvalidInputError);
  REQUIRE_THROWS_AS(SimplexPoint(Vec{}), InvalidInputError);
}

TEST_CASE("evaluate_A at vertices and interior points", "[model]") {
  const PolytopicSystem sys = scalar_fixture();

  // vertex points return the vertex matrix bit-exactly
  REQUIRE(evaluate_A(sys, SimplexPoint::vertex(0, 2))(0, 0) == 0.5);
  REQUIRE(evaluate_A(sys, SimplexPoint::vertex(1, 2))(0, 0) == 2.0);

  // affine in the weights
  const SimplexPoint mid(Vec{0.5, 0.5});
  REQUIRE(evaluate_A(sys, mid)(0, 0) == Approx(1.25));

  REQUIRE_THROWS_AS(evaluate_A(sys, SimplexPoint(Vec{1.0})), InvalidInputError);
}

TEST_CASE("evaluate_A is affine in xi", "[model][property]") {
  auto rng = testsupport::make_rng(501);
  PolytopicSystem sys;
  sys.strictly_polytopic = true;
  const std::size_t n = 3, N = 4;
  for (std::size_t i = 0; i < N; ++i) sys.A.push_back(testsupport::random_matrix(rng, n, n));
  sys.B = testsupport::random_matrix(rng, n, 2);
  sys.C = testsupport::random_matrix(rng, 2, n);

  for (int rep = 0; rep < 20; ++rep) {
    // two random simplex points and a convex combination parameter
    const auto draw = [&]() {
      Vec w(N);
      double s = 0.0;
      for (double& x : w) {
        x = testsupport::unit_uniform(rng);
        s += x;
      }
      for (double& x : w) x /= s;
      return SimplexPoint(w);
    };
    const SimplexPoint a = draw(), b = draw();
    const double th = testsupport::unit_uniform(rng);
    Vec mixed(N);
    for (std::size_t i = 0; i < N; ++i) mixed[i] = th * a[i] + (1.0 - th) * b[i];
    const Matrix lhs = evaluate_A(sys, SimplexPoint(mixed));
    const Matrix rhs = th * evaluate_A(sys, a) + (1.0 - th) * evaluate_A(sys, b);
    REQUIRE(frobenius_norm(lhs - rhs) <= 1e-12 * std::max(1.0, frobenius_norm(rhs)));
  }
}

TEST_CASE("validate reports shape violations", "[model]") {
  PolytopicSystem sys = scalar_fixture();
  REQUIRE(validate(sys).empty());

  sys.B = Matrix{{1.0}, {1.0}};  // wrong row count
  const auto v = validate(sys);
  REQUIRE_FALSE(v.empty());
  REQUIRE(v.front().field == "B");

  PolytopicSystem ragged = scalar_fixture();
  ragged.A.push_back(Matrix::identity(2));
  REQUIRE_FALSE(validate(ragged).empty());
}

TEST_CASE("random_schedule is deterministic and well formed", "[model]") {
  const Schedule a = random_schedule(3, 50, ScheduleMode::VertexSwitching, 42);
  const Schedule b = random_schedule(3, 50, ScheduleMode::VertexSwitching, 42);
  REQUIRE(a.size() == 51);
  REQUIRE(b.size() == 51);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(a[k][i] == b[k][i]);
  }

  // vertex mode emits pure vertices
  for (const auto& p : a) {
    int ones = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 1.0) ++ones;
      else REQUIRE(p[i] == 0.0);
    }
    REQUIRE(ones == 1);
  }

  // different seeds differ somewhere
  const Schedule c = random_schedule(3, 50, ScheduleMode::VertexSwitching, 43);
  bool differs = false;
  for (std::size_t k = 0; k < a.size() && !differs; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (a[k][i] != c[k][i]) differs = true;
    }
  }
  REQUIRE(differs);
}

TEST_CASE("random_schedule interior mode stays strictly inside the simplex", "[model]") {
  const Schedule s = random_schedule(4, 30, ScheduleMode::InteriorDirichlet, 7);
  REQUIRE(s.size() == 31);
  for (const auto& p : s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      REQUIRE(p[i] > 0.0);
      sum += p[i];
    }
    REQUIRE(sum == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("random_schedule with one vertex is constant", "[model]") {
  for (const auto mode : {ScheduleMode::VertexSwitching, ScheduleMode::InteriorDirichlet}) {
    const Schedule s = random_schedule(1, 5, mode, 99);
    REQUIRE(s.size() == 6);
    for (const auto& p : s) {
      REQUIRE(p.size() == 1);
      REQUIRE(p[0] == 1.0);
    }
  }
}

TEST_CASE("system JSON round trip is bit exact", "[model][io]") {
  auto rng = testsupport::make_rng(502);
  PolytopicSystem sys;
  sys.name = "roundtrip";
  sys.strictly_polytopic = true;
  for (int i = 0; i < 3; ++i) sys.A.push_back(testsupport::random_matrix(rng, 4, 4, 2.0));
  sys.B = testsupport::random_matrix(rng, 4, 2);
  sys.C = testsupport::random_matrix(rng, 1, 4);

  const auto path = (temp_dir() / "sys_roundtrip.json").string();
  save_system(path, sys);
  const PolytopicSystem back = load_system(path);

  REQUIRE(back.name == sys.name);
  REQUIRE(back.strictly_polytopic == sys.strictly_polytopic);
  REQUIRE(back.A.size() == sys.A.size());
  for (std::size_t i = 0; i < sys.A.size(); ++i) {
    for (std::size_t k = 0; k < sys.A[i].data().size(); ++k) {
      REQUIRE(back.A[i].data()[k] == sys.A[i].data()[k]);  // exact, not Approx
    }
  }
  for (std::size_t k = 0; k < sys.B.data().size(); ++k) {
    REQUIRE(back.B.data()[k] == sys.B.data()[k]);
  }
  for (std::size_t k = 0; k < sys.C.data().size(); ++k) {
    REQUIRE(back.C.data()[k] == sys.C.data()[k]);
  }
}

TEST_CASE("system loader rejects malformed files", "[model][io]") {
  const auto dir = temp_dir();

  SECTION("missing C") {
    const auto path = (dir / "missing_c.json").string();
    std::ofstream(path) << R"({"strictly_polytopic": true, "A": [[[1.0]]], "B": [[1.0]]})";
    REQUIRE_THROWS_AS(load_system(path), FormatError);
  }

  SECTION("parse failure") {
    const auto path = (dir / "broken.json").string();
    std::ofstream(path) << "{ not json";
    REQUIRE_THROWS_AS(load_system(path), FormatError);
  }

  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_system((dir / "nope.json").string()), FormatError);
  }

  SECTION("shape violation surfaces as InvalidInput") {
    const auto path = (dir / "badshape.json").string();
    std::ofstream(path)
        << R"({"strictly_polytopic": true, "A": [[[1.0]]], "B": [[1.0],[2.0]], "C": [[1.0]]})";
    REQUIRE_THROWS_AS(load_system(path), InvalidInputError);
  }

  SECTION("ragged matrix") {
    const auto path = (dir / "ragged.json").string();
    std::ofstream(path)
        << R"({"strictly_polytopic": true, "A": [[[1.0, 2.0],[3.0]]], "B": [[1.0]], "C": [[1.0]]})";
    REQUIRE_THROWS_AS(load_system(path), FormatError);
  }
}

TEST_CASE("schedule JSON round trip", "[model][io]") {
  const Schedule s = random_schedule(3, 20, ScheduleMode::InteriorDirichlet, 11);
  const auto path = (temp_dir() / "sched_roundtrip.json").string();
  save_schedule(path, s);
  const Schedule back = load_schedule(path);
  REQUIRE(back.size() == s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(back[k][i] == s[k][i]);
  }

  const auto bad = (temp_dir() / "sched_bad.json").string();
  std::ofstream(bad) << R"({"xi": [[0.5, 0.6]]})";  // sums to 1.1
  REQUIRE_THROWS_AS(load_schedule(bad), FormatError);
}

TEST_CASE("trajectory CSV shape", "[model][io]") {
  const Schedule s = random_schedule(2, 2, ScheduleMode::VertexSwitching, 3);
  const std::vector<Vec> states = {{1.0}, {0.5}, {0.25}};
  const Vec v = {0.3, 0.075, 0.01875};
  const std::string csv = trajectory_to_csv(s, states, v);
  REQUIRE(csv.rfind("k,xi_1,xi_2,x_1,V\n", 0) == 0);
  // three data lines plus header
  std::size_t lines = 0;
  for (char ch : csv) {
    if (ch == '\n') ++lines;
  }
  REQUIRE(lines == 4);
  // 17 significant digits reconstruct doubles exactly
  REQUIRE(csv.find("0.29999999999999999") != std::string::npos);
}
