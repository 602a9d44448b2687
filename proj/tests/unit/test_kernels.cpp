#include <doctest.h>

#include <cstring>
#include <vector>

#include "driftsel/kernels.hpp"
#include "helpers.hpp"

using namespace driftsel;
using kernels::KernelTable;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out{&kernels::scalar_table()};
  for (auto isa : {kernels::Isa::avx2, kernels::Isa::neon}) {
    if (const KernelTable* t = kernels::table_for(isa)) out.push_back(t);
  }
  return out;
}

long double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("active kernel table is one of the compiled variants") {
  const KernelTable& k = kernels::active();
  CHECK(kernels::table_for(k.isa) == &k);
  CHECK(kernels::isa_name(k.isa) != "unknown");
}

TEST_CASE("reduction kernels agree with a long double oracle") {
  Rng rng(11);
  for (const KernelTable* k : variants()) {
    CAPTURE(kernels::isa_name(k->isa));
    for (std::size_t n = 0; n < 70; ++n) {
      const auto a = testing::random_vector(rng, n);
      const auto b = testing::random_vector(rng, n);
      const long double dot = naive_dot(a, b);
      long double dist = 0;
      for (std::size_t i = 0; i < n; ++i) dist += (static_cast<long double>(a[i]) - b[i]) * (a[i] - b[i]);
      CHECK(std::abs(k->dot(a.data(), b.data(), n) - static_cast<double>(dot)) <= 1e-13 * (1 + n));
      CHECK(std::abs(k->squared_distance(a.data(), b.data(), n) - static_cast<double>(dist)) <=
            1e-13 * (1 + n));
    }
  }
}

TEST_CASE("element-wise kernel variants are bit-identical to scalar") {
  Rng rng(12);
  const KernelTable& ref = kernels::scalar_table();
  for (const KernelTable* k : variants()) {
    CAPTURE(kernels::isa_name(k->isa));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 17u, 64u, 257u}) {
      const auto x = testing::random_vector(rng, n);
      auto y1 = testing::random_vector(rng, n);
      auto y2 = y1;
      ref.axpy(-0.37, x.data(), y1.data(), n);
      k->axpy(-0.37, x.data(), y2.data(), n);
      CHECK(same_bits(y1, y2));

      auto r1 = x, r2 = x;
      ref.relu(r1.data(), n);
      k->relu(r2.data(), n);
      CHECK(same_bits(r1, r2));

      auto g1 = y1, g2 = y1;
      ref.relu_backward(r1.data(), g1.data(), n);
      k->relu_backward(r1.data(), g2.data(), n);
      CHECK(same_bits(g1, g2));

      auto p1 = testing::random_vector(rng, n), p2 = p1;
      auto m1 = testing::random_vector(rng, n, -0.1, 0.1), m2 = m1;
      auto v1 = testing::random_vector(rng, n, 0.0, 0.1), v2 = v1;
      const kernels::AdamCoefficients c{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
      ref.adam_update(p1.data(), x.data(), m1.data(), v1.data(), n, c);
      k->adam_update(p2.data(), x.data(), m2.data(), v2.data(), n, c);
      CHECK(same_bits(p1, p2));
      CHECK(same_bits(m1, m2));
      CHECK(same_bits(v1, v2));
    }
  }
}

TEST_CASE("scalar kernels match their definitions") {
  const KernelTable& k = kernels::scalar_table();
  std::vector<double> y{1.0, 2.0, 3.0};
  const std::vector<double> x{1.0, -1.0, 0.5};
  k.axpy(2.0, x.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3.0, 0.0, 4.0});
  std::vector<double> r{-1.0, 0.0, 2.0};
  k.relu(r.data(), 3);
  CHECK(r == std::vector<double>{0.0, 0.0, 2.0});
  std::vector<double> g{5.0, 6.0, 7.0};
  k.relu_backward(r.data(), g.data(), 3);
  CHECK(g == std::vector<double>{0.0, 0.0, 7.0});

  // Adam, first step: m = (1-b1) g, v = (1-b2) g^2, update = lr * g/|g| after bias correction.
  std::vector<double> p{1.0}, grad{0.5}, m{0.0}, v{0.0};
  const kernels::AdamCoefficients c{0.1, 0.9, 0.999, 0.0, 0.1, 0.001};
  k.adam_update(p.data(), grad.data(), m.data(), v.data(), 1, c);
  CHECK(m[0] == doctest::Approx(0.05));
  CHECK(v[0] == doctest::Approx(0.00025));
  CHECK(p[0] == doctest::Approx(0.9));
}
