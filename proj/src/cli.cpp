#include "rapidstab/cli.hpp"
#include "rapidstab/errors.hpp"
#include "rapidstab/finite_dim.hpp"
#include "rapidstab/saint_venant.hpp"
#include "rapidstab/simulation.hpp"
#include "rapidstab/stabilizer.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace rapidstab {

static std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

static Vec to_vec(const json& j) {
    std::vector<double> s = j.get<std::vector<double>>();
    return Eigen::Map<Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
}

static std::string resolve_path(const std::string& p, const std::string& base) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).string();
}

// Two numeric columns per line; '#' lines and a non-numeric header are skipped.
static std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                r.push_back(std::stod(cell, &used));
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty()) continue;
            throw UsageError("malformed line in " + path + ": " + line);
        }
        if (r.size() < cols) throw UsageError("expected " + std::to_string(cols) + " columns in " + path);
        rows.push_back(r);
    }
    return rows;
}

RunConfig parse_config(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    RunConfig c;
    c.raw = j;
    try {
        if (j.contains("mu")) {
            const json& m = j["mu"];
            if (m.contains("polynomial"))
                c.mu = DipolarMoment::polynomial(m["polynomial"].get<std::vector<double>>());
            else if (m.contains("samples")) {
                auto rows = read_numeric_csv(resolve_path(m["samples"].get<std::string>(), base_dir), 2);
                std::vector<double> x, v;
                for (auto& r : rows) {
                    x.push_back(r[0]);
                    v.push_back(r[1]);
                }
                c.mu = DipolarMoment::sampled(x, v);
            } else
                throw UsageError("mu needs 'polynomial' or 'samples'");
        }
        c.lambda = j.value("lambda", c.lambda);
        c.N = j.value("N", c.N);
        c.dt = j.value("dt", c.dt);
        c.t_final = j.value("t_final", c.t_final);
        c.sample_every = j.value("sample_every", c.sample_every);
        if (j.contains("initial")) {
            const json& in = j["initial"];
            if (in.contains("file"))
                c.init_file = resolve_path(in["file"].get<std::string>(), base_dir);
            c.init_mode = in.value("mode", c.init_mode);
            std::string comp = in.value("component", std::string("q"));
            if (comp != "p" && comp != "q") throw UsageError("initial.component must be p or q");
            c.init_component = comp[0];
        }
        std::string mode = j.value("mode", std::string("plain"));
        if (mode == "shifted-rotating")
            c.shifted = true;
        else if (mode != "plain")
            throw UsageError("mode must be plain or shifted-rotating");
        c.out_dir = resolve_path(j.value("out_dir", c.out_dir), base_dir);
        c.gains_path = resolve_path(j.value("gains", std::string()), base_dir);
        c.seed = j.value("seed", c.seed);
        c.grid = j.value("grid", c.grid);
        c.M = j.value("M", c.M);
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad config field: ") + e.what());
    }
    if (!(c.lambda > 0)) throw UsageError("lambda must be positive");
    if (c.N < 2) throw UsageError("N must be at least 2");
    if (!(c.dt > 0)) throw UsageError("dt must be positive");
    if (c.t_final < 0) throw UsageError("t_final must be positive");
    if (c.init_mode < 1) throw UsageError("initial.mode must be >= 1");
    if (c.grid < 2 || c.M < 8) throw UsageError("grid >= 2 and M >= 8 required");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j, fs::path(path).parent_path().string());
}

static void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p);
    if (!out) throw Error(kExitUsage, "cannot write " + p.string());
    out << j.dump(2) << '\n';
}

static fs::path out_dir(const RunConfig& c) {
    fs::create_directories(c.out_dir);
    return c.out_dir;
}

void write_transform(const std::string& path, const Mat& T, int N) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(kExitUsage, "cannot write " + path);
    static_assert(std::endian::native == std::endian::little, "transform.bin writer assumes little endian");
    out.write("RSTABT01", 8);
    std::uint32_t n = static_cast<std::uint32_t>(N), reserved = 0;
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    for (int r = 0; r < T.rows(); ++r)
        for (int col = 0; col < T.cols(); ++col) {
            double v = T(r, col);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
}

Mat read_transform(const std::string& path, int& N) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "RSTABT01", 8) != 0) throw UsageError("bad transform magic in " + path);
    std::uint32_t n = 0, reserved = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    N = static_cast<int>(n);
    Mat T(2 * N, 2 * N);
    for (int r = 0; r < 2 * N; ++r)
        for (int col = 0; col < 2 * N; ++col) in.read(reinterpret_cast<char*>(&T(r, col)), 8);
    if (!in) throw UsageError("truncated transform file " + path);
    return T;
}

static json tails_json(const TailReport& t) {
    return {{"M", t.M}, {"S_g", t.S_g}, {"S_h", t.S_h}};
}

int cmd_synth(const RunConfig& c) {
    fs::path dir = out_dir(c);
    Synthesis s = synthesize(c.mu, c.N, c.lambda, c.shifted);
    const ModeTable& t = s.table;
    TransformOperator T = assemble_T(s.basis, s.gains, t);
    FredholmSplit fs_ = fredholm_split(s.basis, s.gains, t);

    Vec b3 = control_vector(t, 3);
    double tb_identity = (T.T * b3 - b3).norm() / b3.norm();
    FrameBounds f2 = frame_bounds(s.basis, 2), f3 = frame_bounds(s.basis, 3);

    json warnings = json::array();
    double coherence = NAN;
    if (c.N < 8) warnings.push_back("N below 8: truncation too small for the N-coherence check");
    if (c.N >= 8) {
        Synthesis half = synthesize(c.mu, c.N / 2, c.lambda, c.shifted);
        int nlow = std::max(1, c.N / 8);
        coherence = 0;
        for (int n = 0; n < nlow; ++n)
            coherence = std::max(coherence, std::abs(s.gains.alpha2[n] - half.gains.alpha2[n]) /
                                                std::abs(s.gains.alpha2[n]));
        if (coherence > 0.01) warnings.push_back("low-mode gains move by more than 1% between N/2 and N");
    }

    json gains = {
        {"schema_version", 1},
        {"N", t.N},
        {"lambda", t.lam},
        {"lambda_shift", t.lambda_shift},
        {"mode", c.shifted ? "shifted-rotating" : "plain"},
        {"rotation_omega", s.gains.rotation_omega},
        {"alpha1", to_std(s.gains.alpha1)},
        {"alpha2", to_std(s.gains.alpha2)},
        {"beta1", to_std(t.beta1)},
        {"beta2", to_std(t.beta2)},
        {"m", to_std(t.m)},
        {"h_k", to_std(t.h)},
    };
    write_json(dir / "gains.json", gains);
    write_transform((dir / "transform.bin").string(), T.T, t.N);

    json report = {
        {"schema_version", 1},
        {"N", t.N},
        {"lambda", t.lam},
        {"tb_eq_b_residual", s.gains.residual},
        {"tb_eq_b_residual_rel", s.gains.residual_rel},
        {"tb_identity_residual", tb_identity},
        {"norm_T", T.norm},
        {"cond_T", T.cond},
        {"frame_bounds", {{"s2", {f2.sigma_min, f2.sigma_max}}, {"s3", {f3.sigma_min, f3.sigma_max}}}},
        {"closeness_tails", {{"s2", tails_json(closeness_tails(s.basis, 2))},
                             {"s3", tails_json(closeness_tails(s.basis, 3))}}},
        {"fredholm", {{"cond_Ttilde", fs_.Ttilde.cond}, {"hs_tail_fraction", fs_.tail_fraction}}},
        {"hypothesis", {{"c_lower", t.hypothesis.c_lower},
                        {"c_upper", t.hypothesis.c_upper},
                        {"worst_k", t.hypothesis.worst_k},
                        {"passed", t.hypothesis.passed}}},
        {"n_coherence", std::isnan(coherence) ? json(nullptr) : json(coherence)},
        {"warnings", warnings},
    };
    write_json(dir / "report.json", report);
    std::cout << "synth: N=" << t.N << " residual=" << s.gains.residual << " cond=" << T.cond << '\n';
    return kExitOk;
}

static SpectralState initial_state(const RunConfig& c, int N) {
    SpectralState x(N);
    if (!c.init_file.empty()) {
        for (auto& r : read_numeric_csv(c.init_file, 3)) {
            int k = static_cast<int>(r[0]);
            if (k < 1 || k > N) throw UsageError("initial mode index out of range");
            x.p[k - 1] = r[1];
            x.q[k - 1] = r[2];
        }
        return x;
    }
    if (c.init_mode > N) throw UsageError("initial.mode exceeds N");
    (c.init_component == 'p' ? x.p : x.q)[c.init_mode - 1] = 1.0;
    return x;
}

int cmd_simulate(const RunConfig& c) {
    std::string gpath = c.gains_path.empty() ? (fs::path(c.out_dir) / "gains.json").string() : c.gains_path;
    std::ifstream gin(gpath);
    if (!gin) throw UsageError("gains file not found: " + gpath + " (run synth first)");
    json gj;
    try {
        gj = json::parse(gin);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed gains file: ") + e.what());
    }
    ModeTable t;
    FeedbackGains g;
    try {
        t.N = gj.at("N").get<int>();
        t.lam = gj.at("lambda").get<double>();
        t.lambda_shift = gj.at("lambda_shift").get<double>();
        t.m = to_vec(gj.at("m"));
        g.alpha1 = to_vec(gj.at("alpha1"));
        g.alpha2 = to_vec(gj.at("alpha2"));
    } catch (const json::exception& e) {
        throw UsageError(std::string("gains file missing fields: ") + e.what());
    }
    t.lambda.resize(t.N);
    t.lambda_t.resize(t.N);
    for (int k = 0; k < t.N; ++k) {
        t.lambda[k] = eigenvalue(k + 1);
        t.lambda_t[k] = t.lambda[k] - t.lambda_shift;
    }
    SimOptions o;
    o.dt = c.dt;
    o.t_final = c.t_final;
    o.sample_every = c.sample_every;
    SpectralState x0 = initial_state(c, t.N);
    SimulationTrace tr = t.shifted() ? simulate_rotating(x0, g, t, o) : simulate(x0, g, t, o);

    fs::path dir = out_dir(c);
    {
        std::ofstream out(dir / "trace.csv", std::ios::binary);
        write_trace_csv(tr, out);
    }
    json summary = {
        {"schema_version", 1},
        {"fitted_rate", tr.fitted_rate},
        {"fit_window", {tr.fit_t0, tr.fit_t1}},
        {"measured_C", tr.measured_C},
        {"instability", tr.unstable},
        {"lambda", t.lam},
        {"N", t.N},
        {"dt", o.dt},
        {"mode", t.shifted() ? "shifted-rotating" : "plain"},
    };
    write_json(dir / "summary.json", summary);
    if (tr.unstable) {
        std::cerr << "simulate: instability guard tripped\n";
        return kExitInstability;
    }
    std::cout << "simulate: fitted_rate=" << tr.fitted_rate << " measured_C=" << tr.measured_C << '\n';
    return kExitOk;
}

int cmd_kernel(const RunConfig& c) {
    Synthesis s = synthesize(c.mu, c.N, c.lambda, c.shifted);
    const ModeTable& t = s.table;
    const KernelTensor& kt = s.tensors;
    const int N = t.N;
    // Coefficient of phi_k(x) phi_n(y), stored at (k, n).
    Mat F12(N, N), F22(N, N);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < N; ++k) {
            double a1 = s.gains.alpha1[n], a2 = s.gains.alpha2[n];
            F12(k, n) = (a1 * kt.c12(n, k) + a2 * kt.d12(n, k)) * t.m[k];
            F22(k, n) = (a1 * kt.c22(n, k) + a2 * kt.d22(n, k)) * t.m[k];
        }
    const int G = c.grid;
    Mat Phi(G, N);
    for (int i = 0; i < G; ++i)
        for (int k = 0; k < N; ++k) Phi(i, k) = eigenfunction(k + 1, double(i) / (G - 1));
    Mat K12 = Phi * F12 * Phi.transpose(), K22 = Phi * F22 * Phi.transpose();

    // y-integrals against mu phi_1 use its N-mode projection (Parseval).
    Vec tb1 = Phi * (F12 * t.m), tb2 = Phi * (F22 * t.m);
    double err12 = tb1.cwiseAbs().maxCoeff(), err22 = 0;
    for (int i = 0; i < G; ++i) {
        double x = double(i) / (G - 1);
        err22 = std::max(err22, std::abs(tb2[i] - c.mu(x) * eigenfunction(1, x)));
    }
    double boundary = 0;
    for (int i = 0; i < G; ++i)
        for (const Mat* K : {&K12, &K22})
            boundary = std::max({boundary, std::abs((*K)(0, i)), std::abs((*K)(G - 1, i)),
                                 std::abs((*K)(i, 0)), std::abs((*K)(i, G - 1))});

    fs::path dir = out_dir(c);
    std::ofstream out(dir / "kernel.csv", std::ios::binary);
    out << "x,y,k12,k22\n";
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j)
            out << format_double(double(i) / (G - 1)) << ',' << format_double(double(j) / (G - 1)) << ','
                << format_double(K12(i, j)) << ',' << format_double(K22(i, j)) << '\n';
    json rep = {
        {"schema_version", 1},
        {"grid", G},
        {"N", N},
        {"boundary_max_abs", boundary},
        {"tb_eq_b_k12_max_abs", err12},
        {"tb_eq_b_k22_max_error", err22},
        {"kernel_max_abs", std::max(K12.cwiseAbs().maxCoeff(), K22.cwiseAbs().maxCoeff())},
    };
    write_json(dir / "kernel_report.json", rep);
    std::cout << "kernel: boundary=" << boundary << " tb12=" << err12 << " tb22=" << err22 << '\n';
    return kExitOk;
}

static json matrix_json(const Eigen::MatrixXd& M) {
    json a = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        std::vector<double> row(M.cols());
        for (int col = 0; col < M.cols(); ++col) row[col] = M(r, col);
        a.push_back(row);
    }
    return a;
}

int cmd_finite_dim(const RunConfig& c) {
    const json& j = c.raw;
    LtiSystem sys;
    try {
        auto A = j.at("A").get<std::vector<std::vector<double>>>();
        auto B = j.at("B").get<std::vector<double>>();
        int n = static_cast<int>(A.size());
        if (n == 0 || static_cast<int>(B.size()) != n) throw UsageError("A must be n x n and B length n");
        sys.A.resize(n, n);
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(A[r].size()) != n) throw UsageError("A must be square");
            for (int col = 0; col < n; ++col) sys.A(r, col) = A[r][col];
        }
        sys.B = Eigen::Map<Eigen::VectorXd>(B.data(), n);
        sys.lambda = c.lambda;
    } catch (const json::exception& e) {
        throw UsageError(std::string("finite-dim input needs A and B: ") + e.what());
    }
    FiniteTransform tk = finite_transform(sys);
    PoleShiftReport r = verify_pole_shift(sys, tk);
    json out = {
        {"schema_version", 1},
        {"T", matrix_json(tk.T)},
        {"K", std::vector<double>(tk.K.data(), tk.K.data() + tk.K.size())},
        {"report", {{"eig_error", r.eig_error},
                    {"identity_rel", r.identity_rel},
                    {"tb_residual", r.tb_residual},
                    {"similarity_rel", r.similarity_rel},
                    {"cond_T", r.cond_T},
                    {"T_invertible", r.T_invertible},
                    {"imag_T", tk.imag_T},
                    {"imag_K", tk.imag_K}}},
    };
    write_json(out_dir(c) / "finite_dim.json", out);
    std::cout << "finite-dim: K =";
    for (int i = 0; i < tk.K.size(); ++i) std::cout << ' ' << tk.K[i];
    std::cout << '\n';
    return kExitOk;
}

int cmd_saint_venant(const RunConfig& c) {
    double tf = c.t_final > 0 ? c.t_final : 10.0;
    RiemannGrid g = sv_initial(c.M, c.lambda);
    SvTrace tr = simulate_sv(g, tf, std::min(2.0, tf / 2), tf);
    double werr = 0;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        werr = std::max(werr, std::abs(tr.weighted[i] - std::exp(-2 * c.lambda * tr.t[i]) * tr.weighted[0]) /
                                  tr.weighted[0]);
    auto [a1, a2] = projected_gains_sv(c.M, c.lambda, 8);
    Vec ex = exact_gains_sv(c.lambda, 8);

    fs::path dir = out_dir(c);
    {
        std::ofstream out(dir / "sv_trace.csv", std::ios::binary);
        out << "t,energy,u\n";
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            out << format_double(tr.t[i]) << ',' << format_double(tr.energy[i]) << ',' << format_double(tr.u[i])
                << '\n';
    }
    json rep = {
        {"schema_version", 1},
        {"lambda", c.lambda},
        {"M", c.M},
        {"fitted_rate", tr.fitted_rate},
        {"expected_rate", 2 * c.lambda},
        {"weighted_energy_max_rel_error", werr},
        {"reflection_coefficient", reflection_coefficient(c.lambda)},
        {"alpha1", to_std(a1)},
        {"alpha2", to_std(a2)},
        {"alpha2_exact", to_std(ex)},
    };
    write_json(dir / "sv_report.json", rep);
    std::cout << "saint-venant: energy rate=" << tr.fitted_rate << " (2 lambda = " << 2 * c.lambda << ")\n";
    return kExitOk;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Rapid stabilization toolkit"};
    app.require_subcommand(1);
    std::string config;
    const char* names[] = {"synth", "simulate", "kernel", "finite-dim", "saint-venant"};
    std::vector<CLI::App*> subs;
    for (const char* n : names) {
        CLI::App* s = app.add_subcommand(n);
        s->add_option("--config", config, "JSON config path")->required();
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    try {
        RunConfig c = load_config(config);
        if (subs[0]->parsed()) return cmd_synth(c);
        if (subs[1]->parsed()) return cmd_simulate(c);
        if (subs[2]->parsed()) return cmd_kernel(c);
        if (subs[3]->parsed()) return cmd_finite_dim(c);
        return cmd_saint_venant(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace rapidstab
