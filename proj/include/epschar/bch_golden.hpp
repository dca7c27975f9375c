#pragma once
// z_1..z_3 and u_1..u_3 written out by hand, for comparison with the
// computed tables. Weight bound W = 3 (r = 4).

#include <vector>

#include "epschar/bch.hpp"

namespace epschar::bch::golden {

inline constexpr int kW = 3;

inline Series X(int i) { return Series::sym(kW, symbol(Family::X, i)); }
inline Series Y(int i) { return Series::sym(kW, symbol(Family::Y, i)); }
inline Series Xp(int i) { return Series::sym(kW, symbol(Family::Xp, i)); }
inline Series br(const Series& a, const Series& b) { return a * b - b * a; }
inline Rational q(int a, int b) { return Rational(a, b); }

inline std::vector<Series> z() {
  return {X(1) + Y(1), X(2) + Y(2) + q(1, 2) * br(X(1), Y(1)),
          X(3) + Y(3) + br(X(2), Y(1)) - q(1, 6) * br(X(1), br(X(1), Y(1))) - q(1, 3) * br(Y(1), br(X(1), Y(1)))};
}

inline std::vector<Series> u() {
  const Series u3 = Xp(3) - X(3) + Y(3) + br(Xp(2), Y(1)) + br(X(2), X(1)) - br(Xp(2), X(1)) - br(Y(2), X(1)) -
                    q(1, 6) * br(Xp(1), br(Xp(1), Y(1))) - q(1, 3) * br(Y(1), br(Xp(1), Y(1))) +
                    q(1, 2) * br(X(1), br(Xp(1), Y(1))) + q(1, 6) * br(Xp(1), br(Xp(1), X(1))) +
                    q(1, 6) * br(Xp(1), br(Y(1), X(1))) + q(1, 6) * br(Y(1), br(Xp(1), X(1))) +
                    q(1, 6) * br(Y(1), br(Y(1), X(1))) - q(1, 3) * br(X(1), br(Xp(1), X(1))) -
                    q(1, 3) * br(X(1), br(Y(1), X(1)));
  return {Xp(1) - X(1) + Y(1),
          Xp(2) - X(2) + Y(2) + q(1, 2) * br(Xp(1), Y(1)) - q(1, 2) * br(Xp(1), X(1)) - q(1, 2) * br(Y(1), X(1)), u3};
}

/// u'_i = u_i - (X'_i - X_i + Y_i).
inline std::vector<Series> uprime() {
  auto us = u();
  for (int i = 1; i <= kW; ++i) us[static_cast<std::size_t>(i - 1)] -= Xp(i) - X(i) + Y(i);
  return us;
}

}  // namespace epschar::bch::golden
