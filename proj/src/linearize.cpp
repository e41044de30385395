// Copyright 2026 The comfortsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "comfortsim/body_model.hpp"
#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

// Coefficients c_k of the diagonal Pade polynomial sum c_k x^k.
std::vector<double> pade_coefficients(int n) {
  std::vector<double> c(static_cast<std::size_t>(n) + 1);
  c[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    // c_k / c_{k-1} = (n - k + 1) / (k (2n - k + 1))
    c[static_cast<std::size_t>(k)] =
        c[static_cast<std::size_t>(k - 1)] * (n - k + 1) / (static_cast<double>(k) * (2 * n - k + 1));
  }
  return c;
}

}  // namespace

SisoStateSpace pade_delay(double delay_s, int order, int sections) {
  if (order < 1 || sections < 1) {
    throw Error(ErrorCode::kInvalidArgument, "Pade order and section count must be >= 1");
  }
  SisoStateSpace one;
  const double tau = delay_s / sections;
  const int n = order;
  if (tau <= 0.0) {
    one.d = 1.0;
    one.a.resize(0, 0);
    one.b.resize(0);
    one.c.resize(0);
    return one;
  }
  const auto ck = pade_coefficients(n);
  // Denominator sum c_k (tau s)^k, numerator sum c_k (-tau s)^k, both made
  // monic in s.
  std::vector<double> den(static_cast<std::size_t>(n) + 1), num(den.size());
  const double lead = ck[static_cast<std::size_t>(n)] * std::pow(tau, n);
  for (int k = 0; k <= n; ++k) {
    const double v = ck[static_cast<std::size_t>(k)] * std::pow(tau, k) / lead;
    den[static_cast<std::size_t>(k)] = v;
    num[static_cast<std::size_t>(k)] = (k % 2 ? -v : v);
  }
  one.d = num[static_cast<std::size_t>(n)];
  one.a = MatrixXd::Zero(n, n);
  one.b = VectorXd::Zero(n);
  one.c = VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) one.a(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) {
    one.a(n - 1, k) = -den[static_cast<std::size_t>(k)];
    one.c(k) = num[static_cast<std::size_t>(k)] - one.d * den[static_cast<std::size_t>(k)];
  }
  one.b(n - 1) = 1.0;
  if (sections == 1) return one;

  // Series cascade of identical sections.
  const int total = n * sections;
  SisoStateSpace out;
  out.a = MatrixXd::Zero(total, total);
  out.b = VectorXd::Zero(total);
  out.c = VectorXd::Zero(total);
  out.d = std::pow(one.d, sections);
  for (int s = 0; s < sections; ++s) {
    out.a.block(s * n, s * n, n, n) = one.a;
    // Input to section s is the output of section s-1.
    double feed = 1.0;
    for (int prev = s - 1; prev >= 0; --prev) {
      out.a.block(s * n, prev * n, n, n) = feed * one.b * one.c.transpose();
      feed *= one.d;
    }
    out.b.segment(s * n, n) = std::pow(one.d, s) * one.b;
  }
  for (int s = 0; s < sections; ++s) {
    out.c.segment(s * n, n) = std::pow(one.d, sections - 1 - s) * one.c;
  }
  return out;
}

cplx SisoStateSpace::response(double freq_hz) const {
  const cplx jw(0.0, 2.0 * std::numbers::pi * freq_hz);
  if (a.rows() == 0) return d;
  Eigen::MatrixXcd m = -a.cast<cplx>();
  m.diagonal().array() += jw;
  const Eigen::VectorXcd x = m.partialPivLu().solve(b.cast<cplx>());
  return c.cast<cplx>().dot(x) + d;
}

StateSpace linearize(const ModelRealization& model, const LinearizeOptions& options) {
  const Eigen::Index n = model.dof();
  const auto& fb = model.feedback();

  std::vector<SisoStateSpace> delays;
  Eigen::Index extra = 0;
  for (const auto& c : fb) {
    double delay = c.delay_s;
    if (options.dt > 0.0) delay = delay_steps(delay, options.dt) * options.dt;
    int sections = 1;
    if (options.max_section_delay_s > 0.0) {
      sections = std::max(1, static_cast<int>(std::ceil(delay / options.max_section_delay_s - 1e-9)));
    }
    delays.push_back(pade_delay(delay, options.pade_order, sections));
    extra += delays.back().a.rows();
  }

  const Eigen::LLT<MatrixXd> llt(model.mass());
  const Eigen::Index ns = 2 * n + extra;
  MatrixXd a = MatrixXd::Zero(ns, ns);
  MatrixXd b = MatrixXd::Zero(ns, 3);

  // Generalised force rows before M^-1: f = Fx x + Fu a_seat.
  MatrixXd fx = MatrixXd::Zero(n, ns);
  fx.leftCols(n) = -model.stiffness();
  fx.middleCols(n, n) = -model.damping();
  MatrixXd fu = model.input_map();

  a.block(0, n, n, n).setIdentity();
  Eigen::Index offset = 2 * n;
  for (std::size_t i = 0; i < fb.size(); ++i) {
    const auto& c = fb[i];
    const auto& d = delays[i];
    const Eigen::Index k = d.a.rows();
    // Pade input u = p q + v q'.
    if (k > 0) {
      a.block(offset, offset, k, k) = d.a;
      a.block(offset, 0, k, n) = d.b * c.position_gain.transpose();
      a.block(offset, n, k, n) = d.b * c.velocity_gain.transpose();
      fx.middleCols(offset, k) -= c.torque_map * d.c.transpose();
    }
    fx.leftCols(n) -= d.d * c.torque_map * c.position_gain.transpose();
    fx.middleCols(n, n) -= d.d * c.torque_map * c.velocity_gain.transpose();
    offset += k;
  }
  const MatrixXd acc_x = llt.solve(fx);
  const MatrixXd acc_u = llt.solve(fu);
  a.middleRows(n, n) = acc_x;
  b.middleRows(n, n) = acc_u;

  const OutputMap& out = model.outputs();
  StateSpace ss;
  ss.outputs = out.channels;
  ss.c = out.acceleration * acc_x;
  ss.c.leftCols(n) += out.position;
  ss.c.middleCols(n, n) += out.velocity;
  ss.d = out.base + out.acceleration * acc_u;
  ss.a = std::move(a);
  ss.b = std::move(b);
  return ss;
}

Eigen::VectorXcd StateSpace::eigenvalues() const {
  return Eigen::EigenSolver<MatrixXd>(a, false).eigenvalues();
}

Eigen::MatrixXcd StateSpace::frequency_response(double freq_hz) const {
  const cplx jw(0.0, 2.0 * std::numbers::pi * freq_hz);
  Eigen::MatrixXcd m = -a.cast<cplx>();
  m.diagonal().array() += jw;
  const Eigen::MatrixXcd x = m.partialPivLu().solve(b.cast<cplx>());
  return c.cast<cplx>() * x + d.cast<cplx>();
}

}  // namespace comfortsim
