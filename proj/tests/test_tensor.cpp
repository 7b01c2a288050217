#include <gtest/gtest.h>

#include "psfem/tensor.hpp"
#include "test_util.hpp"

using namespace psfem;
using namespace testutil;

namespace {

double cofactor_det3(const Tensor2<3>& a) {
  double d = 0.0;
  for (int j = 0; j < 3; ++j) {
    const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
    d += a(0, j) * (a(1, j1) * a(2, j2) - a(1, j2) * a(2, j1));
  }
  return d;
}

}  // namespace

TEST(Det, IdentityAndDiagonal) {
  EXPECT_DOUBLE_EQ(det(Tensor2<3>::identity()), 1.0);
  EXPECT_DOUBLE_EQ(det(Tensor2<3>::diagonal({2, 3, 4})), 24.0);
  EXPECT_DOUBLE_EQ(det(Tensor2<2>::diagonal({2, 3})), 6.0);
}

TEST(Det, MatchesCofactorExpansion) {
  for (int n = 0; n < 100; ++n) {
    const auto a = random_tensor<3>();
    const double ref = cofactor_det3(a);
    EXPECT_LE(std::abs(det(a) - ref), 1e-14 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Inverse, Basic) {
  EXPECT_EQ(inverse(Tensor2<3>::identity()), Tensor2<3>::identity());
  const auto inv = inverse(Tensor2<2>::diagonal({2, 4}));
  EXPECT_DOUBLE_EQ(inv(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(inv(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(inv(0, 1), 0.0);
}

TEST(Inverse, SingularThrows) {
  Tensor2<2> a;
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 2;
  a(1, 1) = 4;
  try {
    inverse(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularTensor);
  }
}

TEST(Inverse, ProductIsIdentity) {
  for (int n = 0; n < 100; ++n) {
    const auto a = random_F<3>(0.8);
    EXPECT_LT(norm(a * inverse(a) - Tensor2<3>::identity()), 1e-12);
    const auto b = random_F<2>(0.8);
    EXPECT_LT(norm(b * inverse(b) - Tensor2<2>::identity()), 1e-12);
  }
}

TEST(Invariants, Examples) {
  auto iv = invariants(Tensor2<3>::identity());
  EXPECT_DOUBLE_EQ(iv.I_C, 3.0);
  EXPECT_DOUBLE_EQ(iv.II_C, 6.0);
  EXPECT_DOUBLE_EQ(iv.J, 1.0);
  iv = invariants(Tensor2<3>::diagonal({4, 1, 1}));
  EXPECT_DOUBLE_EQ(iv.I_C, 6.0);
  EXPECT_DOUBLE_EQ(iv.II_C, 27.0);
  EXPECT_DOUBLE_EQ(iv.J, 2.0);
}

TEST(Invariants, NonSPDThrows) {
  try {
    invariants(Tensor2<3>::diagonal({1, 1, -1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonSPD);
  }
}

TEST(Invariants, HattedTraceTwoWays) {
  for (int n = 0; n < 100; ++n) {
    const auto C = random_spd<3>();
    const auto iv = invariants(C);
    const auto C_iso = std::pow(iv.J, -2.0 / 3.0) * C;
    EXPECT_LE(std::abs(trace(C_iso) - std::pow(iv.J, -2.0 / 3.0) * iv.I_C), 1e-13 * trace(C_iso));
    EXPECT_LE(std::abs(iv.J * iv.J - det(C)), 1e-13 * det(C));
  }
}

TEST(IsoSplit, Examples) {
  auto s = iso_split(2.0 * Tensor2<3>::identity());
  EXPECT_DOUBLE_EQ(s.J, 8.0);
  EXPECT_LT(norm(s.F_iso - Tensor2<3>::identity()), 1e-15);

  const double lam = 1.7;
  const auto F = Tensor2<3>::diagonal({lam, 1.0 / lam, 1.0});
  s = iso_split(F);
  EXPECT_NEAR(s.J, 1.0, 1e-15);
  EXPECT_LT(norm(s.F_iso - F), 1e-15);

  const auto s2 = iso_split(Tensor2<2>::diagonal({2.0, 1.0}));
  EXPECT_DOUBLE_EQ(s2.J, 2.0);
  EXPECT_NEAR(s2.F_iso(0, 0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s2.F_iso(1, 1), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(IsoSplit, InvertedThrows) {
  try {
    iso_split(Tensor2<2>::diagonal({-1.0, 1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvertedElement);
  }
}

TEST(IsoSplit, RecombinationAndUnimodular) {
  for (int n = 0; n < 100; ++n) {
    const auto F = random_F<3>();
    const auto s = iso_split(F);
    EXPECT_NEAR(det(s.F_iso), 1.0, 1e-12);
    EXPECT_LT(norm(std::cbrt(s.J) * s.F_iso - F), 1e-13 * norm(F));
    const auto G = random_F<2>();
    const auto s2 = iso_split(G);
    EXPECT_NEAR(det(s2.F_iso), 1.0, 1e-12);
    EXPECT_LT(norm(std::sqrt(s2.J) * s2.F_iso - G), 1e-13 * norm(G));
  }
}

TEST(Dyads, IndexDefinitions) {
  for (int n = 0; n < 100; ++n) {
    const auto A = random_tensor<3>();
    const auto B = random_tensor<3>();
    const auto AxB = otimes(A, B);
    const auto AoB = odot(A, B);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            ASSERT_DOUBLE_EQ(AxB(i, j, k, l), A(i, j) * B(k, l));
            ASSERT_NEAR(AoB(i, j, k, l), 0.5 * (A(i, k) * B(j, l) + A(i, l) * B(j, k)), 1e-15);
          }
  }
}

TEST(Dyads, IdentityAndContractions) {
  const auto I = Tensor2<3>::identity();
  EXPECT_EQ(odot(I, I), sym_identity<3>());
  for (int n = 0; n < 20; ++n) {
    const auto A = random_tensor<3>();
    const auto B = random_tensor<3>();
    const auto C = random_tensor<3>();
    EXPECT_LT(norm(ddot(otimes(A, B), C) - ddot(B, C) * A), 1e-13);
    const auto S = sym(A);
    EXPECT_LT(norm(ddot(otimes(I, I), S) - trace(S) * I), 1e-14);
  }
}

TEST(Dyads, DeviatoricProjector) {
  const auto D = deviatoric_projector<3>();
  const auto A = sym(random_tensor<3>());
  EXPECT_NEAR(trace(ddot(D, A)), 0.0, 1e-14);
  EXPECT_LT(norm(ddot(D, Tensor2<3>::identity())), 1e-15);
}

TEST(PushForward, Examples) {
  const auto CC = random_elastic_tensor4<3>();
  EXPECT_LT(rel_err(push_forward_tangent(Tensor2<3>::identity(), CC), CC), 1e-15);
  EXPECT_LT(rel_err(push_forward_tangent(2.0 * Tensor2<3>::identity(), CC), 2.0 * CC), 1e-14);
}

TEST(PushForward, MatchesLoopOracleAndKeepsSymmetry) {
  for (int n = 0; n < 20; ++n) {
    const auto F = random_F<3>();
    const auto CC = random_elastic_tensor4<3>();
    const double J = det(F);
    Tensor4<3> ref;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            double s = 0.0;
            for (int I = 0; I < 3; ++I)
              for (int Jj = 0; Jj < 3; ++Jj)
                for (int K = 0; K < 3; ++K)
                  for (int L = 0; L < 3; ++L) s += F(i, I) * F(j, Jj) * F(k, K) * F(l, L) * CC(I, Jj, K, L);
            ref(i, j, k, l) = s / J;
          }
    const auto c = push_forward_tangent(F, CC);
    EXPECT_LT(rel_err(c, ref), 1e-13);
    EXPECT_LT(major_asymmetry(c), 1e-12 * norm(c));
    EXPECT_LT(minor_asymmetry(c), 1e-12 * norm(c));
  }
}

TEST(PushForward, InvertedThrows) {
  try {
    push_forward_tangent(Tensor2<2>::diagonal({1.0, -1.0}), sym_identity<2>());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvertedElement);
  }
}
