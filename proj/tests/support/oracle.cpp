#include "oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace oracle {

Scalar scalar_of(const ietmfc::SystemParams& p) {
  if (p.A.size() != 1 || p.B.size() != 1)
    throw std::invalid_argument("oracle handles scalar scenarios only");
  return {p.A(0, 0),      p.B(0, 0),    p.C(0, 0),     p.F(0, 0),          p.D(0, 0),
          p.Q_I(0, 0),    p.Q(0, 0),    p.Qbar_I(0, 0), p.Qbar(0, 0),      p.R(0, 0),
          p.Gamma(0, 0),  p.GammaBar(0, 0), p.s(0),    p.sbar(0),          p.eta(0),
          p.etaBar(0),    p.T};
}

double Path::operator[](long i) const {
  if (i < first || i > last() || (i - first) % stride != 0)
    throw std::out_of_range("oracle path has no sample at fine index " + std::to_string(i));
  return v[static_cast<std::size_t>((i - first) / stride)];
}

Fine::Fine(const ietmfc::SystemParams& p, long n_fine)
    : m_(scalar_of(p)), n_(n_fine), hf_(p.T / static_cast<double>(n_fine)) {
  // P1, P0 and G have constant coefficients: integrate them jointly backward
  // from T as one autonomous system.
  const Scalar& m = m_;
  auto rhs = [&m](const double y[3], double out[3]) {
    const double P1 = y[0], P0 = y[1], G = y[2];
    out[0] = -(2.0 * m.a * P1 + m.qi + m.q - m.S() * P1 * P1);
    out[1] = -(P0 * (m.a + m.c) + m.a * P0 + m.qi + m.q - m.q * m.gam - m.SF() * P0 * P0);
    out[2] = -(m.a - P0 * m.SF()) * G + m.nu();
  };
  std::vector<double> p1(static_cast<std::size_t>(n_ + 1)), p0(p1.size()), g(p1.size());
  double y[3] = {m.qbi + m.qb, m.qbi + m.qb - m.qb * m.gamb, -m.qbi * m.sb - m.qb * m.etab};
  const double h = -hf_;
  for (long i = n_;; --i) {
    p1[static_cast<std::size_t>(i)] = y[0];
    p0[static_cast<std::size_t>(i)] = y[1];
    g[static_cast<std::size_t>(i)] = y[2];
    if (i == 0) break;
    double k1[3], k2[3], k3[3], k4[3], t[3];
    rhs(y, k1);
    for (int j = 0; j < 3; ++j) t[j] = y[j] + 0.5 * h * k1[j];
    rhs(t, k2);
    for (int j = 0; j < 3; ++j) t[j] = y[j] + 0.5 * h * k2[j];
    rhs(t, k3);
    for (int j = 0; j < 3; ++j) t[j] = y[j] + h * k3[j];
    rhs(t, k4);
    for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  P1_ = {0, 1, std::move(p1)};
  P0_ = {0, 1, std::move(p0)};
  G_ = {0, 1, std::move(g)};
}

long Fine::index(long node, double h) const {
  const double ratio = h / hf_;
  const long r = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(r)) > 1e-9)
    throw std::invalid_argument("library step is not a multiple of the oracle step");
  return node * r;
}

Path Fine::forward(const std::function<double(long, double)>& f, double y0, long i0,
                   long cs) const {
  const long step = 2 * cs;
  if (i0 % step != 0) throw std::invalid_argument("forward start not on the output lattice");
  const double H = step * hf_;
  Path out{i0, step, {}};
  double y = y0;
  for (long i = i0;; i += step) {
    out.v.push_back(y);
    if (i + step > n_) break;
    const double k1 = f(i, y);
    const double k2 = f(i + cs, y + 0.5 * H * k1);
    const double k3 = f(i + cs, y + 0.5 * H * k2);
    const double k4 = f(i + step, y + H * k3);
    y += H / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

Path Fine::backward(const std::function<double(long, double)>& f, double yT, long i0,
                    long cs) const {
  const long step = 2 * cs;
  if (n_ % step != 0 || i0 % step != 0)
    throw std::invalid_argument("backward lattice does not fit the horizon");
  const double H = -step * hf_;
  std::vector<double> rev;
  double y = yT;
  for (long i = n_;; i -= step) {
    rev.push_back(y);
    if (i - step < i0) break;
    const double k1 = f(i, y);
    const double k2 = f(i - cs, y + 0.5 * H * k1);
    const double k3 = f(i - cs, y + 0.5 * H * k2);
    const double k4 = f(i - step, y + H * k3);
    y += H / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {i0, step, std::vector<double>(rev.rbegin(), rev.rend())};
}

Path Fine::predict(double z_start, long i_start) const {
  const Scalar& m = m_;
  return forward(
      [&](long i, double z) {
        return (m.a + m.c - m.SF() * P0_[i]) * z - m.SF() * G_[i];
      },
      z_start, i_start, 1);
}

Path Fine::offset(const Path& z) const {
  const Scalar& m = m_;
  const double zT = z[n_];
  return backward(
      [&](long i, double g) {
        const double P1 = P1_[i];
        const double ubar = -(m.b / m.r) * (P0_[i] * z[i] + G_[i]);
        return -((m.a - P1 * m.S()) * g + (P1 * m.c - m.q * m.gam) * z[i] + P1 * m.f * ubar -
                 m.nu());
      },
      -m.qbi * m.sb - m.qb * (m.gamb * zT + m.etab), z.first, z.stride);
}

Fine::Actual Fine::actual(double z0, double Ebar) const {
  const Scalar& m = m_;
  Actual out;
  out.zbar = predict(z0 + Ebar, 0);
  out.gbar = offset(out.zbar);
  const Path& gbar = out.gbar;
  // Average control of agents following their own laws in the actual mean
  // field: -R^-1 B^T (P1 zA + gbar); the state drift picks up (B + F) of it.
  out.zA = forward(
      [&](long i, double z) {
        return (m.a + m.c - m.SF() * P1_[i]) * z - m.SF() * gbar[i];
      },
      z0, 0, gbar.stride);
  return out;
}

EndpointStats monte_carlo_endpoint(const std::function<double(long)>& alpha,
                                   const std::function<double(long)>& beta, double d,
                                   double hf, long i_s, long i_t, long stride, double x_s,
                                   long paths, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double H = stride * hf;
  const double sq = std::sqrt(H);
  std::vector<double> al, be;
  for (long i = i_s; i <= i_t; i += stride) {
    al.push_back(alpha(i));
    be.push_back(beta(i));
  }
  // Welford's running mean and sum of squared deviations.
  double mean = 0.0, m2 = 0.0;
  for (long p = 0; p < paths; ++p) {
    double x = x_s;
    for (std::size_t j = 0; j + 1 < al.size(); ++j) {
      x += H * (al[j] * x + be[j]) + d * sq * normal(rng);
    }
    const double delta = x - mean;
    mean += delta / static_cast<double>(p + 1);
    m2 += delta * (x - mean);
  }
  EndpointStats st;
  st.samples = paths;
  st.mean = mean;
  st.variance = m2 / static_cast<double>(paths - 1);
  return st;
}

}  // namespace oracle
