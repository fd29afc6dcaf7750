// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/feast.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nhfeast/parallel.hpp"

namespace nhfeast {

namespace {

SolverCounters operator-(const SolverCounters& a, const SolverCounters& b) {
  return {a.factorizations - b.factorizations, a.solves - b.solves, a.cache_hits - b.cache_hits};
}

Complex principal_sqrt(Complex g) {
  // sqrt(-4 - 0i) would land on -2i; pin the branch to the upper side.
  if (g.imag() == 0.0) g = Complex(g.real(), 0.0);
  return std::sqrt(g);
}

void symmetrize(ComplexDense& m) { m = (0.5 * (m + m.transpose())).eval(); }

std::vector<std::size_t> upper_nodes(const Contour& c) {
  std::vector<std::size_t> up;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const std::size_t p = c.conjugate_partner(j);
    const double im = c.nodes()[j].imag();
    if (im > 0.0 || (im == 0.0 && j < p)) up.push_back(j);
  }
  return up;
}

ComplexBlock sum_in_order(const std::vector<ComplexBlock>& parts, Index rows, Index cols) {
  ComplexBlock s = ComplexBlock::Zero(rows, cols);
  for (const auto& p : parts) s += p;
  return s;
}

Error with_iteration(const Error& e, int it) {
  return Error(e.kind(), "iteration " + std::to_string(it) + ": " + e.what());
}

} // namespace

std::string_view to_string(IntegrationMode mode) {
  switch (mode) {
  case IntegrationMode::Full: return "full";
  case IntegrationMode::ComplexSymmetric: return "complex_symmetric";
  case IntegrationMode::RealHalf: return "real_half";
  case IntegrationMode::RealSymmetricHalf: return "real_symmetric_half";
  }
  return "?";
}

std::string_view to_string(FeastStatus s) {
  return s == FeastStatus::Converged ? "converged" : "max_iterations";
}

void FeastConfig::validate(Index n) const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (m0 < 1) bad("m0 must be >= 1");
  if (m0 > n) bad("m0 = " + std::to_string(m0) + " exceeds the problem size " + std::to_string(n));
  if (!(epsilon > 0.0 && epsilon < 1.0)) bad("epsilon must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) bad("eta must lie in (0, 1)");
  if (!(mu > 0.0 && mu < 1.0)) bad("mu must lie in (0, 1)");
  if (max_iterations < 1) bad("max_iterations must be >= 1");
  if (initial_guess) {
    if (initial_guess->right.rows() != n || initial_guess->right.cols() != m0)
      throw Error(ErrorKind::DimensionMismatch, "initial guess must be n x m0");
    if (initial_guess->left.size() != 0 &&
        (initial_guess->left.rows() != n || initial_guess->left.cols() != m0))
      throw Error(ErrorKind::DimensionMismatch, "initial left guess must be n x m0");
  }
}

IntegrationMode select_mode(const Pencil& pencil, const Contour& contour, bool exploit_symmetry) {
  if (!exploit_symmetry) return IntegrationMode::Full;
  const bool half = contour.half_contour_available();
  switch (pencil.kind) {
  case PencilKind::ComplexGeneral: return IntegrationMode::Full;
  case PencilKind::ComplexSymmetric: return IntegrationMode::ComplexSymmetric;
  case PencilKind::RealGeneral: return half ? IntegrationMode::RealHalf : IntegrationMode::Full;
  case PencilKind::RealSymmetric:
    return half ? IntegrationMode::RealSymmetricHalf : IntegrationMode::ComplexSymmetric;
  }
  return IntegrationMode::Full;
}

SubspacePair init_subspaces(Index n, Index m0, std::uint64_t seed) {
  if (m0 < 1 || m0 > n)
    throw Error(ErrorKind::InvalidArgument, "init_subspaces: need 1 <= m0 <= n (m0 = " + std::to_string(m0) +
                                                ", n = " + std::to_string(n) + ")");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  auto fill = [&](ComplexBlock& b) {
    b.resize(n, m0);
    for (Index j = 0; j < m0; ++j)
      for (Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        b(i, j) = Complex(s * re, s * im);
      }
  };
  SubspacePair y;
  fill(y.right);
  fill(y.left);
  return y;
}

SubspacePair integrate_dual(const Pencil& pencil, const Contour& contour, const SubspacePair& y,
                            ShiftedSolver& solver, IntegrationMode mode, unsigned workers) {
  const Index n = pencil.size();
  const Index m = y.width();
  if (y.right.rows() != n || y.left.rows() != n || y.left.cols() != m)
    throw Error(ErrorKind::DimensionMismatch, "integrate_dual: subspace blocks do not match the pencil");
  const auto& z = contour.nodes();
  const auto& w = contour.weights();
  const std::size_t ne = contour.size();
  const bool dual = !conjugate_dual(mode);
  const bool half = mode == IntegrationMode::RealHalf || mode == IntegrationMode::RealSymmetricHalf;
  if (half && !contour.half_contour_available())
    throw Error(ErrorKind::InvalidArgument, "integrate_dual: contour does not support the half-contour path");

  const ComplexBlock by = apply_b(pencil, y.right);
  const ComplexBlock bhy = dual ? apply_b_conj_transpose(pencil, y.left) : ComplexBlock();

  std::vector<ComplexBlock> right(ne), left(dual ? ne : 0);

  if (!half) {
    parallel_for(ne, workers, [&](std::size_t j) {
      solver.prepare(j, z[j]);
      right[j] = w[j] * solver.solve(j, by);
      if (dual) left[j] = std::conj(w[j]) * solver.solve_conj_transpose(j, bhy);
      solver.release(j);
    });
  } else {
    // (z B - A)^* = z^* B - A for real A, B: one factorization serves both
    // nodes of a conjugate pair.
    const auto up = upper_nodes(contour);
    ComplexBlock rhs_r(n, 2 * m), rhs_l;
    rhs_r << by, by.conjugate();
    if (dual) {
      rhs_l.resize(n, 2 * m);
      rhs_l << bhy, bhy.conjugate();
    }
    parallel_for(up.size(), workers, [&](std::size_t t) {
      const std::size_t j = up[t];
      const std::size_t k = contour.conjugate_partner(j);
      solver.prepare(j, z[j]);
      const ComplexBlock s = solver.solve(j, rhs_r);
      right[j] = w[j] * s.leftCols(m);
      right[k] = w[k] * s.rightCols(m).conjugate();
      if (dual) {
        const ComplexBlock h = solver.solve_conj_transpose(j, rhs_l);
        left[j] = std::conj(w[j]) * h.leftCols(m);
        left[k] = std::conj(w[k]) * h.rightCols(m).conjugate();
      }
      solver.release(j);
    });
  }

  SubspacePair q;
  q.right = sum_in_order(right, n, m);
  q.left = dual ? sum_in_order(left, n, m) : ComplexBlock(q.right.conjugate());
  return q;
}

ComplexDense project_bq(const Pencil& pencil, const SubspacePair& q) {
  if (q.right.rows() != q.left.rows() || q.right.cols() != q.left.cols() || q.right.rows() != pencil.size())
    throw Error(ErrorKind::DimensionMismatch, "project_bq: block shapes do not match");
  if (pencil.standard()) return q.left.adjoint() * q.right;
  return q.left.adjoint() * apply_b(pencil, q.right);
}

ResizedDecomposition decompose_resize(const ComplexDense& b_q, double eta, EigNormalization norm) {
  ResizedDecomposition out;
  out.decomp = eig_standard(b_q, norm);
  const auto& g = out.decomp.gamma;
  const double gmax = g.empty() ? 0.0 : std::abs(g.front());
  if (!(gmax > 0.0)) throw Error(ErrorKind::EmptySubspace, "projected B matrix is zero; the subspace collapsed");
  Index keep = 0;
  while (keep < static_cast<Index>(g.size()) && std::abs(g[keep]) >= eta * gmax) ++keep;
  out.m_tilde0 = keep;
  if (keep < static_cast<Index>(g.size())) {
    out.decomp.gamma.resize(static_cast<std::size_t>(keep));
    out.decomp.v_right = out.decomp.v_right.leftCols(keep).eval();
    out.decomp.v_left = out.decomp.v_left.leftCols(keep).eval();
  }
  return out;
}

SubspacePair biorthonormalize(const SubspacePair& q, const EigDecomposition& d) {
  const Index k = static_cast<Index>(d.gamma.size());
  if (d.v_right.cols() != k || d.v_left.cols() != k || d.v_right.rows() != q.width())
    throw Error(ErrorKind::DimensionMismatch, "biorthonormalize: decomposition does not match the subspace");
  ComplexVector s(k);
  for (Index i = 0; i < k; ++i) {
    if (d.gamma[i] == Complex(0.0))
      throw Error(ErrorKind::EmptySubspace, "biorthonormalize: zero eigenvalue retained");
    s(i) = 1.0 / principal_sqrt(d.gamma[i]);
  }
  SubspacePair u;
  u.right = q.right * (d.v_right * s.asDiagonal());
  u.left = q.left * (d.v_left * s.conjugate().asDiagonal());
  return u;
}

void refine_biorthonormality(const Pencil& pencil, SubspacePair& u, bool complex_symmetric) {
  // Each pass removes most of the remaining error; columns scaled up by tiny
  // gamma can need a second one.
  for (int pass = 0; pass < 3; ++pass) {
    const ComplexDense g = u.left.adjoint() * apply_b(pencil, u.right);
    if (g.size() == 0) return;
    if ((g - ComplexDense::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-14) return;
    if (complex_symmetric) {
      ComplexDense s;
      try {
        s = complex_symmetric_normalizer(g, 0.0);
      } catch (const Error&) {
        throw Error(ErrorKind::SingularBU, "bi-orthonormalization broke down (U^T B U is singular)");
      }
      u.right = (u.right * s).eval();
      u.left = u.right.conjugate();
      continue;
    }
    LuFactors f;
    try {
      f = factorize(g);
    } catch (const Error&) {
      throw Error(ErrorKind::SingularBU, "bi-orthonormalization broke down (U-hat^H B U is singular)");
    }
    // U G^-1 = (G^-H U^H)^H
    u.right = solve_conj_transpose(f, u.right.adjoint()).adjoint();
  }
}

double biortho_error(const Pencil& pencil, const SubspacePair& u) {
  const ComplexDense g = u.left.adjoint() * apply_b(pencil, u.right);
  return (g - ComplexDense::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

RitzStep rayleigh_ritz(const Pencil& pencil, const SubspacePair& u, const Contour& contour, EigNormalization norm) {
  RitzStep r;
  const bool sym = norm == EigNormalization::ComplexSymmetric;
  r.a_u = u.left.adjoint() * matvec(pencil.a, u.right);
  r.b_u = pencil.standard() ? ComplexDense(u.left.adjoint() * u.right)
                            : ComplexDense(u.left.adjoint() * apply_b(pencil, u.right));
  if (sym) {
    symmetrize(r.a_u);
    symmetrize(r.b_u);
  }
  GenEigDecomposition g = eig_generalized(r.a_u, r.b_u, norm);

  const Index k = static_cast<Index>(g.lambda_q.size());
  const auto rho = eval_filter(contour, std::span<const Complex>(g.lambda_q));
  std::vector<Complex> rho_v(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho_v[i] = rho[i] ? *rho[i] : Complex(std::numeric_limits<double>::infinity());

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(rho_v[a]) > std::abs(rho_v[b]); });

  r.ritz.left_residual = g.left_residual;
  r.ritz.w_right.resize(k, k);
  r.ritz.w_left.resize(k, k);
  for (Index i = 0; i < k; ++i) {
    r.lambdas.push_back(g.lambda_q[order[i]]);
    r.rho.push_back(rho_v[order[i]]);
    r.ritz.w_right.col(i) = g.w_right.col(order[i]);
    r.ritz.w_left.col(i) = g.w_left.col(order[i]);
  }
  r.ritz.lambda_q = r.lambdas;
  r.y.right = u.right * r.ritz.w_right;
  r.y.left = sym ? ComplexBlock(r.y.right.conjugate()) : ComplexBlock(u.left * r.ritz.w_left);
  return r;
}

std::vector<bool> detect_spurious(const std::vector<Complex>& rho_prev, const ComplexVector& b_q_diag, double mu) {
  if (static_cast<Index>(rho_prev.size()) != b_q_diag.size())
    throw Error(ErrorKind::DimensionMismatch, "detect_spurious: rho list and B_Q diagonal differ in length");
  std::vector<bool> flags(rho_prev.size());
  for (std::size_t i = 0; i < rho_prev.size(); ++i) {
    const Complex r2 = rho_prev[i] * rho_prev[i];
    if (!std::isfinite(std::abs(r2)) || std::abs(r2) < 1e-300) {
      flags[i] = true;
      continue;
    }
    // Inclusive boundary; a few ulps of slack so 1 - 0.9 still counts as 0.1.
    const double ratio = std::abs((r2 - b_q_diag(static_cast<Index>(i))) / r2);
    flags[i] = ratio >= mu * (1.0 - 4.0 * std::numeric_limits<double>::epsilon());
  }
  return flags;
}

std::vector<double> residuals(const Pencil& pencil, const SubspacePair& x, const std::vector<Complex>& lambdas,
                              const ConvergenceCriteria& criteria) {
  if (!(criteria.alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "residuals: alpha must be positive");
  const Index k = x.width();
  if (static_cast<Index>(lambdas.size()) != k || x.left.cols() != k)
    throw Error(ErrorKind::DimensionMismatch, "residuals: eigenvalue count does not match the vectors");
  const ComplexBlock ax = matvec(pencil.a, x.right);
  const ComplexBlock bx = apply_b(pencil, x.right);
  const ComplexBlock ahx = matvec_conj_transpose(pencil.a, x.left);
  const ComplexBlock bhx = apply_b_conj_transpose(pencil, x.left);
  const double inf = std::numeric_limits<double>::infinity();
  auto norm1 = [](const auto& v) { return v.cwiseAbs().sum(); };
  std::vector<double> res(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const Complex l = lambdas[i];
    const double dr = criteria.alpha * norm1(bx.col(i));
    const double dl = criteria.alpha * norm1(bhx.col(i));
    const double rr = dr > 0.0 ? norm1(ax.col(i) - l * bx.col(i)) / dr : inf;
    const double rl = dl > 0.0 ? norm1(ahx.col(i) - std::conj(l) * bhx.col(i)) / dl : inf;
    res[i] = std::max(rr, rl);
  }
  return res;
}

FeastResult run(const Pencil& pencil, const Contour& contour, const FeastConfig& config) {
  DenseShiftedSolver solver(pencil, config.cache_factorizations);
  return run(pencil, contour, config, solver);
}

FeastResult run(const Pencil& pencil, const Contour& contour, const FeastConfig& config, ShiftedSolver& solver) {
  pencil.validate();
  const Index n = pencil.size();
  config.validate(n);
  const ConvergenceCriteria crit{config.epsilon, contour.alpha()};

  IntegrationMode mode = select_mode(pencil, contour, config.exploit_symmetry);
  EigNormalization norm =
      conjugate_dual(mode) ? EigNormalization::ComplexSymmetric : EigNormalization::BiOrthonormal;
  auto drop_symmetry = [&] {
    norm = EigNormalization::BiOrthonormal;
    mode = (is_real_kind(pencil.kind) && contour.half_contour_available() && config.exploit_symmetry)
               ? IntegrationMode::RealHalf
               : IntegrationMode::Full;
  };

  SubspacePair y;
  if (config.initial_guess) {
    y = *config.initial_guess;
    if (y.left.size() == 0) y.left = y.right.conjugate();
  } else {
    y = init_subspaces(n, config.m0, config.seed);
  }
  if (conjugate_dual(mode)) y.left = y.right.conjugate();

  FeastResult result;
  const SolverCounters start = solver.counters();
  std::vector<Complex> rho_prev;
  std::vector<bool> inside_prev;
  Index m_r_prev = 0;
  std::vector<std::size_t> selected;

  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolverCounters c0 = solver.counters();
    IterationReport rep;
    rep.iteration = it;
    rep.width = y.width();
    rep.mode = mode;
    try {
      // Step 1: dual contour integration.
      const SubspacePair q = integrate_dual(pencil, contour, y, solver, mode, config.workers);

      // Step 2: projected B and the spurious test against last iteration's filter values.
      ComplexDense b_q = project_bq(pencil, q);
      if (norm == EigNormalization::ComplexSymmetric) symmetrize(b_q);
      Index flagged = 0;
      if (it >= 2) {
        rep.spurious = detect_spurious(rho_prev, b_q.diagonal(), config.mu);
        for (std::size_t i = 0; i < rep.spurious.size(); ++i)
          if (rep.spurious[i] && inside_prev[i]) ++flagged;
      }

      // Step 3: resize and bi-orthonormalize.
      ResizedDecomposition rd;
      try {
        rd = decompose_resize(b_q, config.eta, norm);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DefectiveSuspected || norm != EigNormalization::ComplexSymmetric) throw;
        drop_symmetry();
        rd = decompose_resize(b_q, config.eta, norm);
      }
      rep.m_tilde0 = rd.m_tilde0;
      SubspacePair u = biorthonormalize(q, rd.decomp);
      refine_biorthonormality(pencil, u, norm == EigNormalization::ComplexSymmetric);
      rep.biortho_error = biortho_error(pencil, u);

      // Step 4: Rayleigh-Ritz.
      RitzStep rr;
      try {
        rr = rayleigh_ritz(pencil, u, contour, norm);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DefectiveSuspected || norm != EigNormalization::ComplexSymmetric) throw;
        drop_symmetry();
        rr = rayleigh_ritz(pencil, u, contour, norm);
      }

      // Step 5: residuals and convergence.
      rep.ritz_values = rr.lambdas;
      rep.rho = rr.rho;
      rep.residuals = residuals(pencil, rr.y, rr.lambdas, crit);
      rep.inside.resize(rr.lambdas.size());
      std::vector<std::size_t> in;
      for (std::size_t i = 0; i < rr.lambdas.size(); ++i) {
        rep.inside[i] = inside(contour, rr.lambdas[i]);
        if (rep.inside[i]) in.push_back(i);
      }
      rep.m_r = static_cast<Index>(in.size());
      // The flags describe last iteration's Ritz values. Flagged values that
      // have since left the contour no longer count against m_r.
      rep.m_s = std::clamp(rep.m_r - (m_r_prev - flagged), Index{0}, flagged);
      m_r_prev = rep.m_r;
      rep.m = rep.m_r - rep.m_s;
      std::stable_sort(in.begin(), in.end(),
                       [&](std::size_t a, std::size_t b) { return rep.residuals[a] < rep.residuals[b]; });
      in.resize(static_cast<std::size_t>(rep.m));
      std::sort(in.begin(), in.end());
      selected = in;
      for (std::size_t i : selected) rep.max_residual = std::max(rep.max_residual, rep.residuals[i]);

      rho_prev = rr.rho;
      inside_prev = rep.inside;
      y = std::move(rr.y);
    } catch (const Error& e) {
      throw with_iteration(e, it);
    }

    rep.counters = solver.counters() - c0;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // An empty selection proves nothing unless the contour holds no Ritz value.
    const bool converged = rep.m_r == 0 || (it >= 2 && rep.m > 0 && rep.max_residual < config.epsilon);
    result.reports.push_back(std::move(rep));
    result.iterations = it;
    if (converged) {
      result.status = FeastStatus::Converged;
      break;
    }
  }

  const auto& last = result.reports.back();
  const Index m = static_cast<Index>(selected.size());
  result.x_right.resize(n, m);
  result.x_left.resize(n, m);
  for (Index k = 0; k < m; ++k) {
    const std::size_t i = selected[k];
    result.lambdas.push_back(last.ritz_values[i]);
    result.residuals.push_back(last.residuals[i]);
    result.x_right.col(k) = y.right.col(static_cast<Index>(i));
    result.x_left.col(k) = y.left.col(static_cast<Index>(i));
  }
  result.subspace = std::move(y);
  result.counters = solver.counters() - start;
  return result;
}

double estimate_count(const Pencil& pencil, const Contour& contour, const EstimateOptions& opts) {
  const Index n = pencil.size();
  ComplexBlock v;
  if (opts.full_basis) {
    v = ComplexBlock::Identity(n, n);
  } else {
    if (opts.samples < 1) throw Error(ErrorKind::InvalidArgument, "estimate_count: samples must be >= 1");
    std::mt19937_64 rng(opts.seed);
    std::bernoulli_distribution coin(0.5);
    v.resize(n, opts.samples);
    for (Index j = 0; j < v.cols(); ++j)
      for (Index i = 0; i < n; ++i) v(i, j) = coin(rng) ? 1.0 : -1.0;
  }
  DenseShiftedSolver solver(pencil, false);
  const ComplexBlock bv = apply_b(pencil, v);
  const auto& z = contour.nodes();
  const auto& w = contour.weights();
  std::vector<ComplexBlock> parts(contour.size());
  parallel_for(contour.size(), opts.workers, [&](std::size_t j) {
    solver.prepare(j, z[j]);
    parts[j] = w[j] * solver.solve(j, bv);
    solver.release(j);
  });
  const ComplexBlock q = sum_in_order(parts, n, v.cols());
  Complex tr = 0.0;
  for (Index k = 0; k < v.cols(); ++k) tr += v.col(k).dot(q.col(k));
  return opts.full_basis ? tr.real() : tr.real() / static_cast<double>(v.cols());
}

} // namespace nhfeast
