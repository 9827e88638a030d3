#include "rapidstab/simulation.hpp"
#include "rapidstab/errors.hpp"

#include <charconv>
#include <cmath>
#include <complex>

namespace rapidstab {

CayleyStepper::CayleyStepper(const Mat& M, double dt) : M_(M), dt_(dt) {
    Mat L = Mat::Identity(M.rows(), M.cols()) - 0.5 * dt * M;
    lu_.compute(L);
    if (!std::isfinite(std::abs(lu_.determinant())) || lu_.rcond() < 1e-14)
        throw Instability("implicit midpoint matrix is singular; reduce dt");
}

Vec CayleyStepper::step(const Vec& u) const { return lu_.solve(u + 0.5 * dt_ * (M_ * u)); }

SpectralState step_closed_loop(const SpectralState& x, const FeedbackGains& g, const ModeTable& t,
                               double dt) {
    CayleyStepper s(closed_loop_matrix(t, g), dt);
    return SpectralState::from_stacked(s.step(x.stacked()));
}

// z' = (-i w - lam) z with z = p + i q, one Cayley step per mode.
static SpectralState scalar_step(const SpectralState& x, const Vec& w, double lam, double dt, bool split) {
    using C = std::complex<double>;
    SpectralState y(x.size());
    double h = 0.5 * dt;
    double damp = (1 - h * lam) / (1 + h * lam);
    for (int k = 0; k < x.size(); ++k) {
        C z(x.p[k], x.q[k]);
        C a(0, -w[k]);
        C f = split ? damp * (1.0 + h * a) / (1.0 - h * a) : (1.0 + h * (a - lam)) / (1.0 - h * (a - lam));
        z *= f;
        y.p[k] = z.real();
        y.q[k] = z.imag();
    }
    return y;
}

SpectralState step_target(const SpectralState& x, double lam, const ModeTable& t, double dt) {
    return scalar_step(x, t.lambda_t, lam, dt, true);
}

SpectralState step_target_midpoint(const SpectralState& x, double lam, const ModeTable& t, double dt) {
    return scalar_step(x, t.lambda_t, lam, dt, false);
}

double fit_rate(const std::vector<double>& times, const std::vector<double>& norms, double t0, double t1) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 - 1e-12 || times[i] > t1 + 1e-12 || norms[i] <= 0) continue;
        double y = std::log(norms[i]);
        n += 1;
        sx += times[i];
        sy += y;
        sxx += times[i] * times[i];
        sxy += times[i] * y;
    }
    if (n < 2) return 0;
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

static void resolve(SimOptions& o, double lam) {
    if (o.t_final <= 0) o.t_final = 6 / lam;
    if (o.fit_t1 <= 0) {
        o.fit_t0 = 1 / lam;
        o.fit_t1 = 6 / lam;
    }
    if (o.sample_every < 1) o.sample_every = 1;
}

// Shared driver: advance(u, step index) returns the next state.
template <class Advance, class Control>
static SimulationTrace run(SpectralState x, const ModeTable& t, SimOptions opt, Advance advance,
                           Control control) {
    resolve(opt, t.lam);
    SimulationTrace tr;
    tr.fit_t0 = opt.fit_t0;
    tr.fit_t1 = opt.fit_t1;
    const long steps = std::lround(opt.t_final / opt.dt);
    double n0 = sobolev_norm(x, 3);
    for (long i = 0; i <= steps; ++i) {
        double time = i * opt.dt;
        double n3 = sobolev_norm(x, 3);
        if (!std::isfinite(n3) || n3 > opt.guard * n0) {
            tr.unstable = true;
            break;
        }
        if (i % opt.sample_every == 0 || i == steps) {
            tr.times.push_back(time);
            tr.norm0.push_back(sobolev_norm(x, 0));
            tr.norm3.push_back(n3);
            tr.control.push_back(control(x, time));
            if (n0 > 0) tr.measured_C = std::max(tr.measured_C, n3 / (std::exp(-t.lam * time) * n0));
        }
        if (i < steps) x = advance(x, i);
    }
    tr.fitted_rate = fit_rate(tr.times, tr.norm3, tr.fit_t0, tr.fit_t1);
    return tr;
}

SimulationTrace simulate(const SpectralState& initial, const FeedbackGains& g, const ModeTable& t,
                         const SimOptions& opt) {
    SpectralState x0 = initial;
    if (t.shifted()) x0.p[0] = 0;
    CayleyStepper s(closed_loop_matrix(t, g), opt.dt);
    return run(
        x0, t, opt,
        [&](const SpectralState& x, long) { return SpectralState::from_stacked(s.step(x.stacked())); },
        [&](const SpectralState& x, double) { return static_feedback(g, x); });
}

TransformedTrace simulate_transformed(const SpectralState& initial, const FeedbackGains& g,
                                      const Mat& T, const ModeTable& t, const SimOptions& o) {
    SimOptions opt = o;
    resolve(opt, t.lam);
    SpectralState x = initial;
    if (t.shifted()) x.p[0] = 0;
    CayleyStepper s(closed_loop_matrix(t, g), opt.dt);
    auto xi_of = [&](const SpectralState& y) { return unweighted(T * weighted(y, 3), 3); };
    SpectralState xi = xi_of(x);
    double xi0 = sobolev_norm(xi, 3);
    TransformedTrace tr;
    const long steps = std::lround(opt.t_final / opt.dt);
    for (long i = 0; i <= steps; ++i) {
        if (i % opt.sample_every == 0 || i == steps) {
            SpectralState d = xi_of(x);
            d.p -= xi.p;
            d.q -= xi.q;
            tr.times.push_back(i * opt.dt);
            tr.divergence.push_back(xi0 > 0 ? sobolev_norm(d, 3) / xi0 : 0.0);
            tr.xi_norm.push_back(sobolev_norm(xi, 3));
        }
        if (i < steps) {
            x = SpectralState::from_stacked(s.step(x.stacked()));
            xi = step_target_midpoint(xi, t.lam, t, opt.dt);
        }
    }
    return tr;
}

SpectralState rotate(const SpectralState& x, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    SpectralState y;
    y.p = c * x.p - s * x.q;
    y.q = s * x.p + c * x.q;
    return y;
}

SimulationTrace simulate_rotating(const SpectralState& initial, const FeedbackGains& gs,
                                  const ModeTable& ts, const SimOptions& opt, bool rotating_frame) {
    const double w = ts.lambda_shift;
    const int N = ts.N;
    SpectralState x0 = initial;
    x0.p[0] = 0;
    FeedbackGains g = gs;
    g.rotation_omega = w;
    auto control = [&](const SpectralState& x, double time) { return feedback_value(g, x, time); };

    if (rotating_frame) {
        CayleyStepper s(closed_loop_matrix(ts, gs), opt.dt);
        return run(
            x0, ts, opt,
            [&](const SpectralState& x, long i) {
                SpectralState y = rotate(x, w * i * opt.dt);
                y = SpectralState::from_stacked(s.step(y.stacked()));
                return rotate(y, -w * (i + 1) * opt.dt);
            },
            control);
    }

    // u' = A u + (sin(wt) m, cos(wt) m) k(t)^T u, with k(t) the rotated gains.
    Mat A = skew_matrix(ts.lambda);
    Mat I = Mat::Identity(2 * N, 2 * N);
    return run(
        x0, ts, opt,
        [&](const SpectralState& x, long i) {
            double tm = (i + 0.5) * opt.dt;
            double c = std::cos(w * tm), s = std::sin(w * tm);
            Vec b(2 * N), k(2 * N);
            b << s * ts.m, c * ts.m;
            k << c * gs.alpha1 + s * gs.alpha2, -s * gs.alpha1 + c * gs.alpha2;
            Mat M = A + b * k.transpose();
            Vec u = x.stacked();
            Eigen::PartialPivLU<Mat> lu(I - 0.5 * opt.dt * M);
            return SpectralState::from_stacked(lu.solve(u + 0.5 * opt.dt * (M * u)));
        },
        control);
}

std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

void write_trace_csv(const SimulationTrace& tr, std::ostream& os) {
    os << "t,norm_L2,norm_H3,control_v\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        os << format_double(tr.times[i]) << ',' << format_double(tr.norm0[i]) << ','
           << format_double(tr.norm3[i]) << ',' << format_double(tr.control[i]) << '\n';
}

}  // namespace rapidstab
