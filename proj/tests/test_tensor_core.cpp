#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tubekit/gradcheck.hpp"
#include "tubekit/rng.hpp"
#include "tubekit/tape.hpp"
#include "tubekit/tbf.hpp"

using namespace tubekit;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 0}, {}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ShapeError);
  Tensor t = Tensor::full({2, 3}, 1.5);
  CHECK(t.numel() == 6);
  CHECK(t.at2(1, 2) == 1.5);
}

TEST_CASE("conv2d spec examples") {
  Tape tape;
  SUBCASE("scalar kernel doubles a map of ones") {
    NodeId x = tape.leaf(Tensor::full({1, 1, 3, 3}, 1.0));
    NodeId k = tape.leaf(Tensor({1, 1, 1, 1}, {2.0}));
    NodeId y = tape.conv2d(x, k, 1, 0);
    CHECK(tape.value(y).shape == std::vector<int64_t>{1, 1, 3, 3});
    for (double v : tape.value(y).data) CHECK(v == 2.0);
  }
  SUBCASE("identity kernel is the identity map exactly") {
    Rng rng(3);
    Tensor input = random_tensor({2, 1, 4, 5}, rng);
    NodeId x = tape.leaf(input);
    NodeId k = tape.leaf(Tensor({1, 1, 1, 1}, {1.0}));
    NodeId y = tape.conv2d(x, k, 1, 0);
    CHECK(tape.value(y).data == input.data);
  }
  SUBCASE("hand cross-correlation") {
    NodeId x = tape.leaf(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}));
    NodeId k = tape.leaf(Tensor({1, 1, 2, 2}, {1, 0, 0, 1}));
    NodeId y = tape.conv2d(x, k, 1, 0);
    CHECK(tape.value(y).shape == std::vector<int64_t>{1, 1, 1, 1});
    CHECK(tape.value(y).data[0] == 5.0);
  }
  SUBCASE("channel mismatch names the axes") {
    NodeId x = tape.leaf(Tensor::zeros({1, 2, 3, 3}));
    NodeId k = tape.leaf(Tensor::zeros({1, 3, 1, 1}));
    CHECK_THROWS_AS(tape.conv2d(x, k, 1, 0), ShapeError);
  }
}

TEST_CASE("linear spec examples") {
  Tape tape;
  SUBCASE("scalar input") {
    NodeId x = tape.leaf(Tensor::from({1.0}));
    NodeId w = tape.leaf(Tensor({2, 1}, {2.0, 3.0}));
    NodeId y = tape.linear(x, w);
    CHECK(tape.value(y).data == std::vector<double>{2.0, 3.0});
  }
  SUBCASE("zero weights give zero output") {
    NodeId x = tape.leaf(Tensor::from({4.0, -7.0, 2.5}));
    NodeId w = tape.leaf(Tensor::zeros({2, 3}));
    NodeId y = tape.linear(x, w);
    for (double v : tape.value(y).data) CHECK(v == 0.0);
  }
  SUBCASE("hand dot product with bias") {
    NodeId x = tape.leaf(Tensor::from({1.0, 2.0}));
    NodeId w = tape.leaf(Tensor({1, 2}, {1.0, 1.0}));
    NodeId b = tape.leaf(Tensor::from({0.5}));
    NodeId y = tape.linear(x, w, b);
    CHECK(tape.value(y).data[0] == 3.5);
  }
  SUBCASE("dimension mismatch") {
    NodeId x = tape.leaf(Tensor::from({1.0, 2.0, 3.0}));
    NodeId w = tape.leaf(Tensor({1, 2}, {1.0, 1.0}));
    CHECK_THROWS_AS(tape.linear(x, w), ShapeError);
  }
}

TEST_CASE("relu and tanh examples") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::from({-3.0, 0.0, 3.0, 1.0}));
  NodeId r = tape.relu(x);
  CHECK(tape.value(r).data == std::vector<double>{0.0, 0.0, 3.0, 1.0});
  NodeId t = tape.tanh(x);
  CHECK(tape.value(t).data[1] == 0.0);
  CHECK(tape.value(t).data[3] == doctest::Approx(0.7615941559557649).epsilon(1e-14));
}

TEST_CASE("relu subgradient at zero is zero") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::from({0.0, 2.0}));
  NodeId y = tape.sum(tape.relu(x));
  tape.backward(y);
  CHECK(tape.grad(x).data == std::vector<double>{0.0, 1.0});
}

TEST_CASE("global_avg_pool examples") {
  Tape tape;
  SUBCASE("constant map returns the constant exactly") {
    NodeId x = tape.leaf(Tensor::full({1, 2, 3, 3}, 4.0));
    CHECK(tape.value(tape.global_avg_pool(x)).data == std::vector<double>{4.0, 4.0});
  }
  SUBCASE("2x2 arithmetic mean") {
    NodeId x = tape.leaf(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}));
    CHECK(tape.value(tape.global_avg_pool(x)).data[0] == 2.5);
  }
  SUBCASE("zero map") {
    NodeId x = tape.leaf(Tensor::zeros({1, 1, 4, 4}));
    CHECK(tape.value(tape.global_avg_pool(x)).data[0] == 0.0);
  }
}

TEST_CASE("grid_sample examples and clamping") {
  Tape tape;
  SUBCASE("exact at lattice coordinates") {
    Rng rng(11);
    Tensor img = random_tensor({1, 1, 3, 4}, rng);
    NodeId x = tape.leaf(img);
    NodeId c = tape.leaf(Tensor({1, 1, 2}, {2.0, 1.0}));
    CHECK(tape.value(tape.grid_sample_bilinear(x, c)).data[0] == img.at4(0, 0, 1, 2));
  }
  SUBCASE("midpoint of a 2-pixel row") {
    NodeId x = tape.leaf(Tensor({1, 1, 1, 2}, {0.0, 1.0}));
    NodeId c = tape.leaf(Tensor({1, 1, 2}, {0.5, 0.0}));
    CHECK(tape.value(tape.grid_sample_bilinear(x, c)).data[0] == 0.5);
  }
  SUBCASE("far out-of-range coordinate clamps to the corner") {
    Rng rng(12);
    Tensor img = random_tensor({1, 1, 3, 3}, rng);
    NodeId x = tape.leaf(img);
    NodeId c = tape.leaf(Tensor({1, 1, 2}, {-7.0, 0.0}));
    CHECK(tape.value(tape.grid_sample_bilinear(x, c)).data[0] == img.at4(0, 0, 0, 0));
  }
  SUBCASE("clamped points get zero coordinate gradient") {
    NodeId x = tape.leaf(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}));
    NodeId c = tape.leaf(Tensor({1, 2, 2}, {-3.0, 0.5, 0.5, 9.0}));
    NodeId y = tape.sum(tape.grid_sample_bilinear(x, c));
    tape.backward(y);
    const Tensor& gc = tape.grad(c);
    CHECK(gc.data[0] == 0.0);  // x clamped on point 0
    CHECK(gc.data[3] == 0.0);  // y clamped on point 1
  }
  SUBCASE("NaN coordinate raises a numeric error") {
    NodeId x = tape.leaf(Tensor::zeros({1, 1, 2, 2}));
    NodeId c = tape.leaf(Tensor({1, 1, 2}, {std::nan(""), 0.0}));
    CHECK_THROWS_AS(tape.grid_sample_bilinear(x, c), NumericError);
  }
}

TEST_CASE("grid_sample is linear along each axis within a cell") {
  Rng rng(21);
  Tensor img = random_tensor({1, 1, 3, 3}, rng);
  auto sample = [&img](double cx, double cy) {
    Tape tape;
    NodeId x = tape.leaf(img);
    NodeId c = tape.leaf(Tensor({1, 1, 2}, {cx, cy}));
    return tape.value(tape.grid_sample_bilinear(x, c)).data[0];
  };
  const double v0 = sample(0.2, 1.3), v1 = sample(0.5, 1.3), v2 = sample(0.8, 1.3);
  CHECK(v1 == doctest::Approx(0.5 * (v0 + v2)).epsilon(1e-12));
  const double h0 = sample(1.4, 0.1), h1 = sample(1.4, 0.45), h2 = sample(1.4, 0.8);
  CHECK(h1 == doctest::Approx(0.5 * (h0 + h2)).epsilon(1e-12));
}

TEST_CASE("gradient accumulation is additive across fan-out") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::from({1.0, -2.0}));
  NodeId y = tape.sum(tape.add(x, x));
  tape.backward(y);
  CHECK(tape.grad(x).data == std::vector<double>{2.0, 2.0});
}

TEST_CASE("backward seeds flow through reshape and affine") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::from({1.0, 2.0, 3.0, 4.0}));
  NodeId y = tape.affine(tape.reshape(x, {2, 2}), 3.0, 1.0);
  tape.backward_from(y, Tensor({2, 2}, {1.0, 10.0, 100.0, 1000.0}));
  CHECK(tape.grad(x).data == std::vector<double>{3.0, 30.0, 300.0, 3000.0});
}

TEST_CASE("gradcheck spec examples") {
  Rng rng(5);
  SUBCASE("sum of tanh") {
    Tensor x = random_tensor({8}, rng, -1.5, 1.5);
    Tape tape;
    NodeId xn = tape.leaf(x);
    NodeId loss = tape.sum(tape.tanh(xn));
    tape.backward(loss);
    ScalarFn f = [](const std::vector<Tensor>& ps) {
      Tape t;
      return t.value(t.sum(t.tanh(t.leaf(ps[0])))).data[0];
    };
    GradCheckReport report = gradcheck(f, {x}, {tape.grad(xn)}, 8, 1e-4, 7);
    CHECK(report.max_rel_err < 1e-7);
    CHECK(report.probes == 8);
  }
  SUBCASE("linear function is exact up to truncation") {
    Tensor x = random_tensor({8}, rng);
    Tape tape;
    NodeId xn = tape.leaf(x);
    NodeId loss = tape.sum(xn);
    tape.backward(loss);
    for (double g : tape.grad(xn).data) CHECK(g == 1.0);
    ScalarFn f = [](const std::vector<Tensor>& ps) {
      Tape t;
      return t.value(t.sum(t.leaf(ps[0]))).data[0];
    };
    GradCheckReport report = gradcheck(f, {x}, {tape.grad(xn)}, 8, 1e-4, 7);
    CHECK(report.max_rel_err < 1e-10);
  }
  SUBCASE("negative control: a corrupted gradient is caught") {
    Tensor x = random_tensor({8}, rng, -1.5, 1.5);
    Tape tape;
    NodeId xn = tape.leaf(x);
    tape.backward(tape.sum(tape.tanh(xn)));
    Tensor bad = tape.grad(xn);
    bad.data[3] += 0.5;
    ScalarFn f = [](const std::vector<Tensor>& ps) {
      Tape t;
      return t.value(t.sum(t.tanh(t.leaf(ps[0])))).data[0];
    };
    GradCheckReport report = gradcheck(f, {x}, {bad}, 8, 1e-4, 7);
    CHECK(report.max_rel_err > 1e-2);
  }
  SUBCASE("non-finite function value raises") {
    Tensor x = Tensor::from({1.0});
    ScalarFn f = [](const std::vector<Tensor>&) { return std::nan(""); };
    CHECK_THROWS_AS(gradcheck(f, {x}, {Tensor::from({0.0})}, 1, 1e-4, 0), NumericError);
  }
}

TEST_CASE("TBF1 round trip preserves shape, payload and bytes") {
  Rng rng(9);
  const auto dir = std::filesystem::temp_directory_path() / "tubekit_tbf_test";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<int64_t> shape;
    const int rank = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < rank; ++i) shape.push_back(1 + static_cast<int64_t>(rng.below(5)));
    Tensor t = random_tensor(shape, rng, -100.0, 100.0);
    const auto path_a = dir / ("a" + std::to_string(trial) + ".tbf");
    const auto path_b = dir / ("b" + std::to_string(trial) + ".tbf");
    write_tbf(path_a, t);
    Tensor back = read_tbf(path_a);
    CHECK(back.shape == t.shape);
    CHECK(back.data == t.data);
    write_tbf(path_b, back);
    std::ifstream fa(path_a, std::ios::binary), fb(path_b, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("TBF1 header layout is as documented") {
  const auto path = std::filesystem::temp_directory_path() / "tubekit_tbf_header.tbf";
  write_tbf(path, Tensor({1, 2}, {1.0, -2.0}));
  std::ifstream is(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 4 + 8 + 16);
  CHECK(bytes.substr(0, 4) == "TBF1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 2);   // rank, little-endian
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);   // dim 0
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);  // dim 1
  std::filesystem::remove(path);
}
