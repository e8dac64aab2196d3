#include "fracvolt/volterra.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "fracvolt/quadrature.hpp"

namespace fracvolt {

namespace {

std::string singular_message(Index node, Scalar condition) {
  std::ostringstream os;
  os << "singular step matrix at node " << node << " (condition estimate " << condition << ")";
  return os.str();
}

std::string divergence_message(Index node, Scalar norm, Scalar threshold) {
  std::ostringstream os;
  os << "solution diverged at node " << node << ": norm " << norm << " exceeds " << threshold;
  return os.str();
}

constexpr Scalar kMinRcond = 1e-14;
constexpr Scalar kDivergenceFactor = 1e12;

struct Setup {
  std::shared_ptr<const KernelAssembly> ka;
  GridFunction f;
  std::vector<std::string> warnings;
  Scalar u0_norm = 0.0;
  Scalar guard = 0.0;
};

Scalar mass_norm(const Matrix& M, const Eigen::Ref<const Vector>& c) {
  return std::sqrt(std::max(0.0, c.dot(M * c)));
}

Setup prepare(const Problem& problem, const std::shared_ptr<const TimeMesh>& mesh,
              const SolverOptions& options) {
  options.validate();
  FracOrder(problem.alpha).require_solver_range();
  if (!mesh) throw ValidationError("time mesh is required");
  if (mesh->intervals() < 2) throw ValidationError("time mesh needs at least 2 intervals");
  if (std::abs(mesh->horizon() - problem.horizon) > 1e-12 * problem.horizon) {
    throw ValidationError("mesh horizon does not match the problem horizon");
  }
  Setup s{std::make_shared<const KernelAssembly>(problem.basis, problem.coeffs,
                                                 options.points_per_cell),
          GridFunction(mesh, problem.basis.dim),
          {},
          0.0,
          0.0};
  s.f = project_data(*s.ka, problem.source, mesh, &s.warnings);
  s.u0_norm = s.ka->l2_norm(problem.source.u0, 0.0);
  Scalar base = s.u0_norm + problem.source.M_bound;
  if (base == 0.0) {
    for (Index n = 0; n < s.f.node_count(); ++n) {
      base = std::max(base, mass_norm(s.ka->mass(), s.f.at(n)));
    }
  }
  s.guard = kDivergenceFactor * base;
  return s;
}

SolutionTrace make_trace(const Setup& s, const Problem& problem, Scheme scheme, Matrix u,
                         Matrix y) {
  const auto& mesh = s.f.mesh_ptr();
  SolutionTrace tr(GridFunction(mesh, std::move(u)), GridFunction(mesh, std::move(y)), s.f);
  tr.scheme = scheme;
  tr.alpha = problem.alpha;
  tr.assembly = s.ka;
  tr.u0_norm = s.u0_norm;
  tr.M_bound = problem.source.M_bound;
  tr.eta = problem.source.eta;
  tr.warnings = s.warnings;
  return tr;
}

// Solve A c = rhs with a conditioning check and one refinement step.
Vector step_solve(const Matrix& A, const Vector& rhs, Index node, Scalar tol, Scalar& defect) {
  Eigen::PartialPivLU<Matrix> lu(A);
  const Scalar rc = lu.rcond();
  if (!(rc > kMinRcond)) throw SingularSystemError(node, rc > 0.0 ? 1.0 / rc : INFINITY);
  Vector c = lu.solve(rhs);
  Vector r = rhs - A * c;
  defect = r.norm();
  if (defect > 1e-3 * tol) {
    c += lu.solve(r);
    defect = (rhs - A * c).norm();
  }
  return c;
}

void check_divergence(const Setup& s, const Vector& c, Index n) {
  const Scalar norm = mass_norm(s.ka->mass(), c);
  if (!std::isfinite(norm) || norm > s.guard) throw DivergenceError(n, norm, s.guard);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SolutionTrace solve_b_form(const Problem& problem, const Setup& s, const SolverOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const KernelAssembly& ka = *s.ka;
  const TimeMesh& mesh = s.f.mesh();
  const Index N = mesh.intervals();
  const Index m = ka.dim();
  const Scalar alpha = problem.alpha;
  const Matrix& M = ka.mass();
  const bool has_k1p = !ka.K1_prime_vanishes();
  const bool has_k2 = !ka.K2_vanishes();
  const double m3 = static_cast<double>(m) * m * m;
  const double m2 = static_cast<double>(m) * m;
  const double assembly_cost =
      2.0 * static_cast<double>(ka.points().size()) * m2 *
      ((ka.K1_time_independent() ? 0 : 1) + (has_k1p ? 1 : 0) +
       (has_k2 && !ka.K2_time_independent() ? 1 : 0));

  Matrix C(m, N + 1);
  Matrix Y = Matrix::Zero(m, N + 1);
  Vector res = Vector::Zero(N + 1);
  C.col(0) = s.f.at(0);

  Vector trapP = Vector::Zero(m);  // int_0^{t_{n-1}} K1' Y by trapezoid
  Vector trapQ = Vector::Zero(m);  // int_0^{t_{n-1}} K2 u by trapezoid
  Vector Aprev = Vector::Zero(m);
  Vector Bprev = has_k2 ? Vector(ka.K2(0.0) * C.col(0)) : Vector::Zero(m);
  double flops = 0.0;

  for (Index n = 1; n <= N; ++n) {
    const Scalar t = mesh[n];
    const Scalar half = 0.5 * mesh.step(n);
    const Vector w = conv_weights(alpha, mesh, n);
    const Vector Yh = C.leftCols(n) * w.head(n);
    const Matrix K1 = ka.K1(t);

    Matrix A = M + w(n) * K1;
    Vector rhs = M * s.f.at(n) - K1 * Yh;
    Matrix K1p;
    Matrix K2;
    if (has_k1p) {
      K1p = ka.K1_prime(t);
      A -= (half * w(n)) * K1p;
      rhs += trapP + half * Aprev + half * (K1p * Yh);
    }
    if (has_k2) {
      K2 = ka.K2(t);
      A += half * K2;
      rhs -= trapQ + half * Bprev;
    }
    Scalar defect = 0.0;
    const Vector c = step_solve(A, rhs, n, opt.tolerance, defect);
    C.col(n) = c;
    Y.col(n) = Yh + w(n) * c;
    res(n) = defect;
    if (has_k1p) {
      const Vector Anew = K1p * Y.col(n);
      trapP += half * (Aprev + Anew);
      Aprev = Anew;
    }
    if (has_k2) {
      const Vector Bnew = K2 * c;
      trapQ += half * (Bprev + Bnew);
      Bprev = Bnew;
    }
    check_divergence(s, c, n);
    flops += 2.0 * static_cast<double>(n) * m + (2.0 / 3.0) * m3 + 12.0 * m2 + assembly_cost;
  }

  SolutionTrace tr = make_trace(s, problem, Scheme::BForm, std::move(C), std::move(Y));
  tr.residual = std::move(res);
  tr.flops = flops;
  tr.wall_seconds = seconds_since(start);
  return tr;
}

// sum_{j<n} w_j G(t_n, t_j) u_j.
Vector kernel_history(const KernelEval& kernel, const TimeMesh& mesh, const Matrix& K1n,
                      const Vector& w, const Matrix& C, Index n) {
  const KernelAssembly& ka = *kernel.assembly;
  Vector hist = K1n * (C.leftCols(n) * w.head(n));
  if (ka.K1_prime_vanishes()) return hist;
  const auto& rule = quad::gauss_jacobi(kernel.inner_order, 0.0, kernel.alpha - 1.0);
  const Scalar t = mesh[n];
  std::vector<Scalar> times(static_cast<std::size_t>(rule.size()));
  std::vector<Scalar> weights(static_cast<std::size_t>(rule.size()));
  for (Index j = 0; j < n; ++j) {
    const Scalar gap = t - mesh[j];
    for (Index q = 0; q < rule.size(); ++q) {
      times[static_cast<std::size_t>(q)] = mesh[j] + gap * rule.nodes(q);
      weights[static_cast<std::size_t>(q)] = gap * rule.weights(q);
    }
    hist -= w(j) * (ka.K1_prime_combination(times, weights) * C.col(j));
  }
  return hist;
}

SolutionTrace solve_kernel_form(const Problem& problem, const Setup& s,
                                const SolverOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const KernelAssembly& ka = *s.ka;
  const TimeMesh& mesh = s.f.mesh();
  const Index N = mesh.intervals();
  const Index m = ka.dim();
  const Scalar alpha = problem.alpha;
  const Matrix& M = ka.mass();
  const bool has_k2 = !ka.K2_vanishes();
  const KernelEval kernel{s.ka, alpha, opt.inner_order};
  const double m2 = static_cast<double>(m) * m;
  const double m3 = m2 * m;
  const double pair_cost = ka.K1_prime_vanishes()
                               ? 0.0
                               : 2.0 * static_cast<double>(ka.points().size()) * m2 + 2.0 * m2;

  Matrix C(m, N + 1);
  Matrix Y = Matrix::Zero(m, N + 1);
  Vector res = Vector::Zero(N + 1);
  C.col(0) = s.f.at(0);
  Vector trapQ = Vector::Zero(m);
  Vector Bprev = has_k2 ? Vector(ka.K2(0.0) * C.col(0)) : Vector::Zero(m);
  double flops = 0.0;

  for (Index n = 1; n <= N; ++n) {
    const Scalar t = mesh[n];
    const Scalar half = 0.5 * mesh.step(n);
    const Vector w = conv_weights(alpha, mesh, n);
    const Matrix K1 = ka.K1(t);
    Matrix A = M + w(n) * K1;
    Vector rhs = M * s.f.at(n) - kernel_history(kernel, mesh, K1, w, C, n);
    Matrix K2;
    if (has_k2) {
      K2 = ka.K2(t);
      A += half * K2;
      rhs -= trapQ + half * Bprev;
    }
    Scalar defect = 0.0;
    const Vector c = step_solve(A, rhs, n, opt.tolerance, defect);
    C.col(n) = c;
    Y.col(n) = C.leftCols(n + 1) * w;
    res(n) = defect;
    if (has_k2) {
      const Vector Bnew = K2 * c;
      trapQ += half * (Bprev + Bnew);
      Bprev = Bnew;
    }
    check_divergence(s, c, n);
    flops += 4.0 * static_cast<double>(n) * m + (2.0 / 3.0) * m3 + 10.0 * m2 +
             static_cast<double>(n) * pair_cost;
  }

  SolutionTrace tr = make_trace(s, problem, Scheme::KernelForm, std::move(C), std::move(Y));
  tr.inner_order = opt.inner_order;
  tr.residual = std::move(res);
  tr.flops = flops;
  tr.wall_seconds = seconds_since(start);
  return tr;
}

Scalar sup_mass_norm(const Matrix& M, const Matrix& values) {
  Scalar out = 0.0;
  for (Index n = 0; n < values.cols(); ++n) out = std::max(out, mass_norm(M, values.col(n)));
  return out;
}

}  // namespace

SingularSystemError::SingularSystemError(Index node, Scalar condition)
    : std::runtime_error(singular_message(node, condition)), node_(node), condition_(condition) {}

DivergenceError::DivergenceError(Index node, Scalar norm, Scalar threshold)
    : std::runtime_error(divergence_message(node, norm, threshold)), node_(node) {}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::BForm: return "b_form";
    case Scheme::KernelForm: return "kernel_form";
    case Scheme::Picard: return "picard";
  }
  return "";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "b_form" || name == "B_FORM") return Scheme::BForm;
  if (name == "kernel_form" || name == "KERNEL_FORM") return Scheme::KernelForm;
  if (name == "picard" || name == "PICARD") return Scheme::Picard;
  throw ValidationError("unknown scheme '" + name + "' (expected b_form, kernel_form or picard)");
}

void SolverOptions::validate() const {
  if (picard_depth < 1) throw ValidationError("picard_depth must be >= 1");
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (inner_order < 1) throw ValidationError("inner_order must be >= 1");
  if (points_per_cell < 0) throw ValidationError("points_per_cell must be >= 0");
}

Matrix KernelEval::G(Scalar t, Scalar s) const {
  Matrix out = assembly->K1(t);
  if (s == t || assembly->K1_prime_vanishes()) return out;
  const auto& rule = quad::gauss_jacobi(inner_order, 0.0, alpha - 1.0);
  std::vector<Scalar> times(static_cast<std::size_t>(rule.size()));
  std::vector<Scalar> weights(static_cast<std::size_t>(rule.size()));
  for (Index q = 0; q < rule.size(); ++q) {
    times[static_cast<std::size_t>(q)] = s + (t - s) * rule.nodes(q);
    weights[static_cast<std::size_t>(q)] = (t - s) * rule.weights(q);
  }
  out -= assembly->K1_prime_combination(times, weights);
  return out;
}

Matrix kernel_eval(const KernelEval& kernel, Scalar t, Scalar s) {
  if (!(s < t)) throw DomainError("kernel_eval requires s < t");
  if (s < 0.0) throw DomainError("kernel_eval requires s >= 0");
  return omega(kernel.alpha, t - s) * kernel.G(t, s) + kernel.H(s);
}

Scalar SolutionTrace::l2_norm(Index n) const { return mass_norm(mass(), u.at(n)); }

Scalar SolutionTrace::h1_seminorm(Index n) const { return mass_norm(grad_gram(), u.at(n)); }

SolutionTrace solve_direct(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                           const SolverOptions& options) {
  if (options.scheme == Scheme::Picard) {
    throw ValidationError("solve_direct needs scheme b_form or kernel_form");
  }
  const Setup s = prepare(problem, mesh, options);
  return options.scheme == Scheme::BForm ? solve_b_form(problem, s, options)
                                         : solve_kernel_form(problem, s, options);
}

Matrix apply_b_operator(const KernelAssembly& ka, Scalar alpha, const GridFunction& u) {
  const TimeMesh& mesh = u.mesh();
  const Index N = mesh.intervals();
  const Index m = ka.dim();
  const Matrix Y = frac_integral(alpha, u).values();
  const bool has_k1p = !ka.K1_prime_vanishes();
  const bool has_k2 = !ka.K2_vanishes();
  Matrix out = Matrix::Zero(m, N + 1);
  Vector trapP = Vector::Zero(m);
  Vector trapQ = Vector::Zero(m);
  Vector Aprev = Vector::Zero(m);
  Vector Bprev = has_k2 ? Vector(ka.K2(0.0) * u.at(0)) : Vector::Zero(m);
  for (Index n = 1; n <= N; ++n) {
    const Scalar t = mesh[n];
    const Scalar half = 0.5 * mesh.step(n);
    out.col(n) = ka.K1(t) * Y.col(n);
    if (has_k1p) {
      const Vector Anew = ka.K1_prime(t) * Y.col(n);
      trapP += half * (Aprev + Anew);
      Aprev = Anew;
      out.col(n) -= trapP;
    }
    if (has_k2) {
      const Vector Bnew = ka.K2(t) * u.at(n);
      trapQ += half * (Bprev + Bnew);
      Bprev = Bnew;
      out.col(n) += trapQ;
    }
  }
  return out;
}

Matrix apply_kernel_operator(const KernelEval& kernel, const GridFunction& u) {
  const KernelAssembly& ka = *kernel.assembly;
  const TimeMesh& mesh = u.mesh();
  const Index N = mesh.intervals();
  const Index m = ka.dim();
  const bool has_k2 = !ka.K2_vanishes();
  Matrix out = Matrix::Zero(m, N + 1);
  Vector trapQ = Vector::Zero(m);
  Vector Bprev = has_k2 ? Vector(ka.K2(0.0) * u.at(0)) : Vector::Zero(m);
  for (Index n = 1; n <= N; ++n) {
    const Vector w = conv_weights(kernel.alpha, mesh, n);
    const Matrix K1 = ka.K1(mesh[n]);
    out.col(n) = kernel_history(kernel, mesh, K1, w, u.values(), n) + w(n) * (K1 * u.at(n));
    if (has_k2) {
      const Vector Bnew = ka.K2(mesh[n]) * u.at(n);
      trapQ += 0.5 * mesh.step(n) * (Bprev + Bnew);
      Bprev = Bnew;
      out.col(n) += trapQ;
    }
  }
  return out;
}

SolutionTrace solve_picard(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                           const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Setup s = prepare(problem, mesh, options);
  const KernelAssembly& ka = *s.ka;
  const Matrix& M = ka.mass();
  const Eigen::LLT<Matrix> mass_llt(M);
  const Index m = ka.dim();
  const Index nodes = s.f.node_count();
  const double m2 = static_cast<double>(m) * m;
  const double N = static_cast<double>(nodes);

  Matrix sum = s.f.values();
  std::vector<Scalar> norms{sup_mass_norm(M, sum)};
  double flops = 0.0;

  if (options.picard_mode == PicardMode::Semigroup) {
    if (!ka.K1_time_independent() || !ka.K1_prime_vanishes() || !ka.K2_vanishes()) {
      throw ValidationError(
          "semigroup Picard mode needs time-constant K1 and vanishing K2");
    }
    const Matrix B = -mass_llt.solve(ka.K1(0.0));
    Matrix Bk = Matrix::Identity(m, m);
    for (int k = 1; k <= options.picard_depth; ++k) {
      Bk = B * Bk;
      const GridFunction Ik = frac_integral(k * problem.alpha, s.f);
      const Matrix term = Bk * Ik.values();
      sum += term;
      norms.push_back(sup_mass_norm(M, term));
      flops += N * N + 2.0 * m2 * N + 2.0 * m2 * m;
    }
  } else {
    Matrix term = s.f.values();
    for (int k = 1; k <= options.picard_depth; ++k) {
      const Matrix L = apply_b_operator(ka, problem.alpha, GridFunction(mesh, term));
      term = -mass_llt.solve(L);
      sum += term;
      norms.push_back(sup_mass_norm(M, term));
      flops += N * N * static_cast<double>(m) + 8.0 * m2 * N;
    }
  }

  for (Index n = 0; n < nodes; ++n) check_divergence(s, sum.col(n), n);
  GridFunction u(mesh, std::move(sum));
  GridFunction y = frac_integral(problem.alpha, u);
  SolutionTrace tr =
      make_trace(s, problem, Scheme::Picard, u.values(), std::move(y.values()));
  tr.picard_term_norms = norms;
  tr.picard_last_term_norm = norms.back();
  const Scalar sol = sup_mass_norm(M, tr.u.values());
  if (tr.picard_last_term_norm > 0.1 * sol) {
    std::ostringstream os;
    os << "Picard series not converged: last term norm " << tr.picard_last_term_norm
       << " exceeds 10% of solution norm " << sol;
    tr.warnings.push_back(os.str());
  }
  tr.residual = residual(tr);
  tr.flops = flops;
  tr.wall_seconds = seconds_since(start);
  return tr;
}

SolutionTrace solve(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                    const SolverOptions& options) {
  return options.scheme == Scheme::Picard ? solve_picard(problem, std::move(mesh), options)
                                          : solve_direct(problem, std::move(mesh), options);
}

Vector residual(const SolutionTrace& trace) {
  const KernelAssembly& ka = *trace.assembly;
  const Matrix L = trace.scheme == Scheme::KernelForm
                       ? apply_kernel_operator(KernelEval{trace.assembly, trace.alpha, trace.inner_order}, trace.u)
                       : apply_b_operator(ka, trace.alpha, trace.u);
  const Matrix D = ka.mass() * (trace.u.values() - trace.f.values()) + L;
  Vector out(D.cols());
  for (Index n = 0; n < D.cols(); ++n) out(n) = D.col(n).norm();
  return out;
}

SolutionTrace unscale_trace(const SolutionTrace& trace, Scalar factor, Scalar horizon) {
  if (factor == 1.0) return trace;
  const TimeMesh& scaled = trace.mesh();
  auto mesh = std::make_shared<const TimeMesh>(horizon, scaled.intervals(), scaled.grading());
  SolutionTrace out = trace;
  out.u = GridFunction(mesh, trace.u.values());
  out.I_alpha_u = GridFunction(mesh, trace.I_alpha_u.values() * std::pow(factor, -trace.alpha));
  out.f = GridFunction(mesh, trace.f.values());
  return out;
}

}  // namespace fracvolt
