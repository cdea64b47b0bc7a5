#include "catqec/tomography.hpp"

#include <json.hpp>

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace catqec::tomography {

namespace {

const Qubit2& pauli(int i) {
  static const std::array<Qubit2, 4> p = [] {
    std::array<Qubit2, 4> m;
    m[0] << 1, 0, 0, 1;
    m[1] << 0, 1, 1, 0;
    m[2] << 0, cplx(0, -1), cplx(0, 1), 0;
    m[3] << 1, 0, 0, -1;
    return m;
  }();
  return p[i];
}

double axis(AxisCounts c, const char* key) {
  const long n = c.plus + c.minus;
  if (c.plus < 0 || c.minus < 0 || n <= 0) {
    throw Error(ErrorKind::invalid_argument, std::string("no counts on axis ") + key, key);
  }
  return double(c.plus - c.minus) / double(n);
}

}  // namespace

BlochVector bloch_from_outcomes(AxisCounts x, AxisCounts y, AxisCounts z) {
  return {axis(x, "x"), axis(y, "y"), axis(z, "z")};
}

Qubit2 density_from_bloch(const Eigen::Vector3d& r) {
  return 0.5 * (pauli(0) + r.x() * pauli(1) + r.y() * pauli(2) + r.z() * pauli(3));
}

Eigen::Vector3d bloch_from_density(const Qubit2& rho) {
  return {(rho * pauli(1)).trace().real(), (rho * pauli(2)).trace().real(),
          (rho * pauli(3)).trace().real()};
}

const std::array<Qubit2, 4>& chi_basis() {
  static const std::array<Qubit2, 4> b = {pauli(0), pauli(1), cplx(0, -1) * pauli(2), pauli(3)};
  return b;
}

ChiMatrix chi_from_cardinals(const CardinalBloch& d, const ChiOptions& opt) {
  const Qubit2 r0 = density_from_bloch(d.plus_z);
  const Qubit2 r1 = density_from_bloch(d.minus_z);
  const Qubit2 mid = 0.5 * (r0 + r1);
  // images of the X and Y projectors, symmetrized when both signs exist
  Qubit2 rx = density_from_bloch(d.plus_x);
  Qubit2 ry = density_from_bloch(d.plus_y);
  if (d.minus_x) rx = mid + 0.5 * (rx - density_from_bloch(*d.minus_x));
  if (d.minus_y) ry = mid + 0.5 * (ry - density_from_bloch(*d.minus_y));
  const cplx i(0, 1);
  // images of the matrix units |a><b|
  std::array<Qubit2, 4> img;
  img[0] = r0;
  img[1] = rx + i * ry - (1.0 + i) / 2.0 * (r0 + r1);
  img[2] = rx - i * ry - (1.0 - i) / 2.0 * (r0 + r1);
  img[3] = r1;

  // solve eps(rho_j) = sum_mn chi_mn E_m rho_j E_n^dag as a 16x16 linear system
  const auto& e = chi_basis();
  Eigen::Matrix<cplx, 16, 16> beta;
  Eigen::Matrix<cplx, 16, 1> rhs;
  for (int j = 0; j < 4; ++j) {
    Qubit2 unit = Qubit2::Zero();
    unit(j / 2, j % 2) = 1.0;
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        const Qubit2 term = e[m] * unit * e[n].adjoint();
        for (int k = 0; k < 4; ++k) beta(4 * j + k, 4 * m + n) = term(k / 2, k % 2);
      }
    }
    for (int k = 0; k < 4; ++k) rhs(4 * j + k) = img[j](k / 2, k % 2);
  }
  const Eigen::Matrix<cplx, 16, 1> sol = beta.fullPivLu().solve(rhs);
  ChiMatrix chi;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) chi(m, n) = sol(4 * m + n);
  }
  chi = 0.5 * (chi + chi.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(chi);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -opt.psd_tolerance) {
    if (!opt.clip) {
      throw Error(ErrorKind::unphysical_input,
                  "reconstructed process matrix has eigenvalue " + std::to_string(min_ev));
    }
    const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    chi = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    chi /= chi.trace().real();
  }
  return chi;
}

double chi00_closed_form(const CardinalBloch& d) {
  return 0.25 * (1.0 + (d.plus_x.x() - 0.5 * (d.plus_z.x() + d.minus_z.x())) +
                 (d.plus_y.y() - 0.5 * (d.plus_z.y() + d.minus_z.y())) +
                 0.5 * (d.plus_z.z() - d.minus_z.z()));
}

double process_fidelity(const ChiMatrix& chi) { return chi(0, 0).real(); }

double scaled_fidelity(double f) { return (f - 0.25) / 0.75; }

Qubit2 apply_chi(const ChiMatrix& chi, const Qubit2& rho) {
  Qubit2 out = Qubit2::Zero();
  const auto& e = chi_basis();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) out += chi(m, n) * e[m] * rho * e[n].adjoint();
  }
  return out;
}

Qubit2 apply_kraus(const Kraus& k, const Qubit2& rho) {
  Qubit2 out = Qubit2::Zero();
  for (const auto& e : k) out += e * rho * e.adjoint();
  return out;
}

CardinalBloch cardinal_outputs(const Kraus& k) {
  auto out = [&](double x, double y, double z) {
    return bloch_from_density(apply_kraus(k, density_from_bloch({x, y, z})));
  };
  CardinalBloch d;
  d.plus_x = out(1, 0, 0);
  d.minus_x = out(-1, 0, 0);
  d.plus_y = out(0, 1, 0);
  d.minus_y = out(0, -1, 0);
  d.plus_z = out(0, 0, 1);
  d.minus_z = out(0, 0, -1);
  return d;
}

ChiMatrix chi_from_kraus(const Kraus& k) {
  // expand each operator in the chi basis: E = sum_m e_m B_m, e_m = tr(B_m^dag E)/2
  ChiMatrix chi = ChiMatrix::Zero();
  const auto& b = chi_basis();
  for (const auto& e : k) {
    Eigen::Vector4cd c;
    for (int m = 0; m < 4; ++m) c(m) = (b[m].adjoint() * e).trace() / 2.0;
    chi += c * c.adjoint();
  }
  return chi;
}

Kraus amplitude_damping_channel(double t, double t0, double n_th) {
  if (t < 0.0) throw Error(ErrorKind::invalid_argument, "t must be >= 0", "t");
  if (!(t0 > 0.0)) throw Error(ErrorKind::invalid_argument, "t0 must be positive", "t0");
  if (!(n_th >= 0.0 && n_th <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "n_th must lie in [0, 1]", "n_th");
  }
  const double f = -std::expm1(-t / t0);
  const double a = std::sqrt(1.0 - n_th), b = std::sqrt(n_th);
  Kraus k(4, Qubit2::Zero());
  k[0] << a, 0, 0, a * std::sqrt(1.0 - f);
  k[1] << 0, a * std::sqrt(f), 0, 0;
  k[2] << b * std::sqrt(1.0 - f), 0, 0, b;
  k[3] << 0, 0, b * std::sqrt(f), 0;
  return k;
}

Kraus dephasing_channel(double coherence) {
  if (!(coherence >= -1.0 && coherence <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "coherence factor must lie in [-1, 1]", "coherence");
  }
  return {std::sqrt((1.0 + coherence) / 2.0) * pauli(0), std::sqrt((1.0 - coherence) / 2.0) * pauli(3)};
}

Kraus compose(const Kraus& a, const Kraus& b) {
  Kraus out;
  for (const auto& y : b) {
    for (const auto& x : a) out.push_back(y * x);
  }
  return out;
}

Eigen::Matrix3d rotation_matrix(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

namespace {

CardinalBloch rotate_data(const CardinalBloch& d, const Eigen::Matrix3d& r) {
  CardinalBloch o;
  o.plus_x = r * d.plus_x;
  o.plus_y = r * d.plus_y;
  o.plus_z = r * d.plus_z;
  o.minus_z = r * d.minus_z;
  if (d.minus_x) o.minus_x = r * *d.minus_x;
  if (d.minus_y) o.minus_y = r * *d.minus_y;
  return o;
}

struct FrameProblem {
  const CardinalBloch* data;
  double bound;
};

// chi_00 with the x/y data symmetrized, as a function of the three angles
double frame_objective(const gsl_vector* v, void* params) {
  const auto* p = static_cast<const FrameProblem*>(params);
  double ang[3];
  for (int i = 0; i < 3; ++i) ang[i] = std::clamp(gsl_vector_get(v, i), -p->bound, p->bound);
  const CardinalBloch r = rotate_data(*p->data, rotation_matrix(ang[0], ang[1], ang[2]));
  const double px = 0.5 * (r.plus_x.x() - r.minus_x->x());
  const double py = 0.5 * (r.plus_y.y() - r.minus_y->y());
  const double pz = 0.5 * (r.plus_z.z() - r.minus_z.z());
  return -0.25 * (1.0 + px + py + pz);
}

}  // namespace

FrameResult frame_optimize(const CardinalBloch& data, double bound) {
  if (!data.minus_x || !data.minus_y) {
    throw Error(ErrorKind::invalid_argument, "frame optimization needs all six inputs", "data");
  }
  FrameProblem prob{&data, bound};
  gsl_multimin_function fn{&frame_objective, 3, &prob};
  gsl_vector* x = gsl_vector_calloc(3);
  gsl_vector* step = gsl_vector_alloc(3);
  gsl_vector_set_all(step, 2.0 * kPi / 180.0);
  gsl_multimin_fminimizer* s =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  int status = GSL_CONTINUE;
  int iter = 0;
  while (status == GSL_CONTINUE && iter < 2000) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(s)) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-9);
  }
  FrameResult r;
  for (int i = 0; i < 3; ++i) r.angles(i) = std::clamp(gsl_vector_get(s->x, i), -bound, bound);
  r.iterations = iter;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);

  r.rotation = rotation_matrix(r.angles(0), r.angles(1), r.angles(2));
  ChiOptions opt;
  opt.clip = true;
  r.chi = chi_from_cardinals(rotate_data(data, r.rotation), opt);
  r.fidelity = process_fidelity(r.chi);
  return r;
}

double isotropy_deviation(const std::vector<Eigen::Vector3d>& outputs) {
  if (outputs.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& v : outputs) mean += v.norm();
  mean /= outputs.size();
  double dev = 0.0;
  for (const auto& v : outputs) dev = std::max(dev, std::abs(v.norm() - mean));
  return dev;
}

namespace {

struct FitData {
  const std::vector<double>* t;
  const std::vector<double>* F;
  DecayModel model;
  double nbar0;
};

double model_value(DecayModel m, double nbar0, double A, double tau, double t) {
  if (m == DecayModel::single_exponential) return 0.25 + A * std::exp(-t / tau);
  return 0.25 + A * std::exp(-nbar0 * -std::expm1(-t / tau));
}

int fit_f(const gsl_vector* x, void* data, gsl_vector* f) {
  const auto* d = static_cast<const FitData*>(data);
  const double A = gsl_vector_get(x, 0), tau = gsl_vector_get(x, 1);
  for (std::size_t i = 0; i < d->t->size(); ++i) {
    gsl_vector_set(f, i, model_value(d->model, d->nbar0, A, tau, (*d->t)[i]) - (*d->F)[i]);
  }
  return GSL_SUCCESS;
}

int fit_df(const gsl_vector* x, void* data, gsl_matrix* J) {
  const auto* d = static_cast<const FitData*>(data);
  const double A = gsl_vector_get(x, 0), tau = gsl_vector_get(x, 1);
  for (std::size_t i = 0; i < d->t->size(); ++i) {
    const double t = (*d->t)[i];
    if (d->model == DecayModel::single_exponential) {
      const double e = std::exp(-t / tau);
      gsl_matrix_set(J, i, 0, e);
      gsl_matrix_set(J, i, 1, A * e * t / (tau * tau));
    } else {
      const double u = std::exp(-t / tau);
      const double e = std::exp(-d->nbar0 * (1.0 - u));
      gsl_matrix_set(J, i, 0, e);
      // d/dtau of -nbar0 (1 - exp(-t/tau)) = nbar0 exp(-t/tau) t / tau^2
      gsl_matrix_set(J, i, 1, A * e * d->nbar0 * u * t / (tau * tau));
    }
  }
  return GSL_SUCCESS;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& F, DecayModel model,
                   double nbar0) {
  if (t.size() != F.size()) {
    throw Error(ErrorKind::invalid_argument, "times and fidelities differ in length", "F");
  }
  if (t.size() < 4) throw Error(ErrorKind::invalid_argument, "fit needs at least 4 points", "t");
  if (model == DecayModel::uncorrected_cat && !(nbar0 > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "uncorrected-cat model needs nbar0 > 0", "nbar0");
  }

  // start from a log-linear fit of F - 0.25
  double A0 = std::max(1e-3, F.front() - 0.25);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (F[i] - 0.25 <= 1e-6) continue;
    const double y = std::log(F[i] - 0.25);
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++m;
  }
  double tau0 = (t.back() - t.front()) + 1.0;
  if (m >= 2) {
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (slope < 0.0) {
      tau0 = -1.0 / slope;
      A0 = std::exp((sy - slope * sx) / m);
    }
  }
  if (model == DecayModel::uncorrected_cat) tau0 *= nbar0;

  FitData data{&t, &F, model, nbar0};
  gsl_multifit_nlinear_fdf fdf;
  fdf.f = &fit_f;
  fdf.df = &fit_df;
  fdf.fvv = nullptr;
  fdf.n = t.size();
  fdf.p = 2;
  fdf.params = &data;

  gsl_multifit_nlinear_parameters fp = gsl_multifit_nlinear_default_parameters();
  gsl_multifit_nlinear_workspace* w =
      gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &fp, t.size(), 2);
  gsl_vector* x0 = gsl_vector_alloc(2);
  gsl_vector_set(x0, 0, A0);
  gsl_vector_set(x0, 1, tau0);
  gsl_multifit_nlinear_init(x0, &fdf, w);
  int info = 0;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_multifit_nlinear_driver(500, 1e-10, 1e-10, 0.0, nullptr, nullptr, &info, w);
  gsl_set_error_handler(old);

  DecayFit fit;
  fit.model = model;
  fit.nbar0 = nbar0;
  fit.A = gsl_vector_get(w->x, 0);
  fit.tau = gsl_vector_get(w->x, 1);
  fit.iterations = static_cast<int>(gsl_multifit_nlinear_niter(w));
  double chisq = 0.0;
  gsl_blas_ddot(w->f, w->f, &chisq);
  fit.rss = chisq;

  gsl_matrix* J = gsl_multifit_nlinear_jac(w);
  gsl_matrix* covar = gsl_matrix_alloc(2, 2);
  gsl_multifit_nlinear_covar(J, 0.0, covar);
  const double dof = std::max<double>(1.0, double(t.size()) - 2.0);
  const double c = std::sqrt(chisq / dof);
  fit.A_err = c * std::sqrt(std::max(0.0, gsl_matrix_get(covar, 0, 0)));
  fit.tau_err = c * std::sqrt(std::max(0.0, gsl_matrix_get(covar, 1, 1)));
  gsl_matrix_free(covar);
  gsl_vector_free(x0);
  gsl_multifit_nlinear_free(w);

  if (status != GSL_SUCCESS || !std::isfinite(fit.tau) || !(fit.tau > 0.0)) {
    throw Error(ErrorKind::non_convergence,
                std::string("decay fit did not converge: ") + gsl_strerror(status));
  }
  return fit;
}

double evaluate_decay(const DecayFit& fit, double t) {
  return model_value(fit.model, fit.nbar0, fit.A, fit.tau, t);
}

std::string chi_to_json(const ChiMatrix& chi) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) row.push_back({chi(i, j).real(), chi(i, j).imag()});
    rows.push_back(row);
  }
  nlohmann::json j;
  j["basis"] = {"I", "X", "-iY", "Z"};
  j["chi"] = rows;
  j["process_fidelity"] = process_fidelity(chi);
  return j.dump(2);
}

ChiMatrix chi_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ChiMatrix chi;
    const auto& rows = j.at("chi");
    if (rows.size() != 4) throw std::runtime_error("chi needs 4 rows");
    for (int i = 0; i < 4; ++i) {
      if (rows[i].size() != 4) throw std::runtime_error("chi rows need 4 entries");
      for (int k = 0; k < 4; ++k) {
        chi(i, k) = cplx(rows[i][k].at(0).get<double>(), rows[i][k].at(1).get<double>());
      }
    }
    return chi;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::io, std::string("bad process matrix JSON: ") + e.what());
  }
}

std::string fit_to_json(const DecayFit& fit) {
  nlohmann::json j;
  j["model"] = fit.model == DecayModel::single_exponential ? "single_exponential" : "uncorrected_cat";
  j["A"] = fit.A;
  j["A_err"] = fit.A_err;
  j["tau"] = fit.tau;
  j["tau_err"] = fit.tau_err;
  if (fit.model == DecayModel::uncorrected_cat) j["nbar0"] = fit.nbar0;
  j["rss"] = fit.rss;
  return j.dump(2);
}

void write_decay_csv(std::ostream& os, const std::vector<double>& t, const std::vector<double>& F,
                     const std::vector<double>& sigma) {
  if (t.size() != F.size() || t.size() != sigma.size()) {
    throw Error(ErrorKind::dim_mismatch, "decay columns differ in length");
  }
  os << "t,F,sigma_F\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << F[i] << ',' << sigma[i] << '\n';
}

void read_decay_csv(std::istream& is, std::vector<double>& t, std::vector<double>& F,
                    std::vector<double>& sigma) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,F", 0) != 0) {
    throw Error(ErrorKind::io, "decay table must start with a t,F,sigma_F header", "decay");
  }
  t.clear();
  F.clear();
  sigma.clear();
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    try {
      t.push_back(std::stod(a));
      F.push_back(std::stod(b));
      sigma.push_back(c.empty() ? 0.0 : std::stod(c));
    } catch (const std::exception&) {
      throw Error(ErrorKind::io, "malformed decay row at line " + std::to_string(lineno), "decay");
    }
  }
}

}  // namespace catqec::tomography
