// isomono: checks, flows, monodromy audits and caustic scans for coalesced
// isomonodromic systems dY/dz = (Lambda + A/z) Y.

#include <CLI11.hpp>

#include "isomono/caustic.hpp"
#include "isomono/monodromy.hpp"
#include "isomono/showcase.hpp"
#include "isomono/specio.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

using namespace isomono;

namespace {

constexpr int EXIT_PASS = 0;
constexpr int EXIT_NUMERICAL_FAIL = 1;
constexpr int EXIT_INPUT_ERROR = 2;

struct CommonArgs {
    std::string spec_path;
    std::string preset;
    std::string out_path;
    std::string format = "report";
    double tol = 0.0;
    int K = 0;
    int samples = 3;
    std::string path_file;
};

SystemSpec resolve_spec(const CommonArgs& args) {
    if (!args.preset.empty()) return preset_spec(args.preset);
    if (!args.spec_path.empty()) return load_system_spec(args.spec_path);
    throw ParseError("need --spec FILE or --preset NAME");
}

void emit(const Report& rep, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << rep.to_json();
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        out << rep.to_json();
    }
    for (const auto& c : rep.checks)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << c.value
                  << " tol=" << c.tolerance << "\n";
}

DeformationPath load_path(const std::string& file, const SystemSpec& spec) {
    if (file.empty()) {
        // default: nudge the first eigenvalue by +1 along the real axis
        auto to = spec.lambda;
        to[0] += Complex(1.0, 0.0);
        return DeformationPath::line(spec.lambda, to);
    }
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open path file: " + file);
    // one waypoint per line: re im re im ... (s pairs)
    DeformationPath path;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<Complex> wp;
        double re, im;
        while (ls >> re >> im) wp.push_back(Complex(re, im));
        if (wp.size() != spec.lambda.size())
            throw ParseError("path file: each waypoint needs s complex values");
        path.waypoints.push_back(wp);
    }
    if (path.waypoints.size() < 2) throw ParseError("path file: need at least two waypoints");
    return path;
}

int cmd_check(const CommonArgs& args) {
    SystemSpec spec = resolve_spec(args);
    CoalescedSystem sys = spec.to_system();
    double tol = args.tol > 0 ? args.tol : spec.constraint_tol;

    Report rep;
    rep.command = "check";
    rep.inputs_digest = digest_hex(dump_system_spec(spec));

    PfaffianForm form = build_pfaffian(sys);
    auto lin = check_linear_constraints(form, tol);
    rep.add("lambda_commutator", lin.lambda_commutator_residual / lin.scale, tol);
    rep.add("cross_commutator", lin.cross_commutator_residual / lin.scale, tol);

    if (sys.s() > 1) {
        const BlockPartition part = sys.partition();
        const DSpec dspec = spec.to_dspec();
        auto flow = [&](const std::vector<Complex>& lam) {
            Lambda lambda(lam, part);
            Matrix A = sys.A;   // frozen-A curl of the omega field
            if (spec.dspec_kind == "3d-example") {
                ThreeDExample ex;
                A = example3d_closed_form(ex, lam[0] - lam[1]);
            }
            CoalescedSystem s(lambda, A, dspec);
            return build_pfaffian(s);
        };
        double margin = 1.0;
        double h = 1e-5 * margin;
        auto curl = curl_residual(flow, sys.lambda.values, h);
        rep.add("d_curl", curl.d_curl_residual_h, std::max(tol, 1e-8));
    }
    emit(rep, args.out_path);
    return rep.pass() ? EXIT_PASS : EXIT_NUMERICAL_FAIL;
}

int cmd_flow(const CommonArgs& args) {
    SystemSpec spec = resolve_spec(args);
    CoalescedSystem sys = spec.to_system();
    DeformationPath path = load_path(args.path_file, spec);

    FlowOptions fopt;
    fopt.rtol = args.tol > 0 ? args.tol : spec.rtol;
    fopt.monitor_fail = spec.monitor_fail;
    FlowResult res = integrate_flow(sys.A, sys.partition(), path, spec.to_dspec(), fopt);

    Report rep;
    rep.command = "flow";
    rep.inputs_digest = digest_hex(dump_system_spec(spec));
    rep.add("spectrum_drift", res.monitors.spectrum_drift, 1e-9);
    if (spec.to_dspec().is_zero())
        rep.add("diag_block_drift", res.monitors.diag_block_drift, 1e-10);
    if (res.monitors.closure_error >= 0)
        rep.add("loop_closure", res.monitors.closure_error, 1e-8);

    if (args.format == "csv") {
        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!args.out_path.empty()) {
            file.open(args.out_path);
            os = &file;
        }
        const int n = sys.n();
        *os << "t";
        for (int j = 0; j < sys.s(); ++j) *os << ",re_lambda" << j << ",im_lambda" << j;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) *os << ",re_A" << i << j << ",im_A" << i << j;
        *os << ",spectrum_drift,diag_block_drift\n";
        os->precision(17);
        for (const auto& s : res.samples) {
            *os << s.t;
            for (const auto& l : s.lambda) *os << "," << l.real() << "," << l.imag();
            for (int jc = 0; jc < n; ++jc)
                for (int ic = 0; ic < n; ++ic)
                    *os << "," << s.A(ic, jc).real() << "," << s.A(ic, jc).imag();
            *os << "," << res.monitors.spectrum_drift << "," << res.monitors.diag_block_drift
                << "\n";
        }
        for (const auto& c : rep.checks)
            std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    } else {
        emit(rep, args.out_path);
    }
    return rep.pass() ? EXIT_PASS : EXIT_NUMERICAL_FAIL;
}

int cmd_monodromy(const CommonArgs& args) {
    SystemSpec spec = resolve_spec(args);
    CoalescedSystem sys = spec.to_system();
    DeformationPath path = load_path(args.path_file, spec);

    FlowOptions fopt;
    fopt.rtol = spec.rtol;
    FlowResult res = integrate_flow(sys.A, sys.partition(), path, spec.to_dspec(), fopt);

    AuditOptions aopt;
    aopt.sample_count = args.samples;
    if (args.tol > 0) aopt.tolerance = args.tol;
    if (args.K > 0) {
        aopt.levelt_K = args.K;
        aopt.formal_K = args.K;
    }
    IsomonodromyAudit audit = verify_strong_isomonodromy(res, sys.partition(), aopt);

    Report rep;
    rep.command = "monodromy";
    rep.inputs_digest = digest_hex(dump_system_spec(spec));
    for (const auto& item : audit.items)
        rep.add(item.name, item.failed_to_extract ? std::numeric_limits<double>::infinity()
                                                  : item.deviation,
                item.tolerance);
    emit(rep, args.out_path);
    return rep.pass() ? EXIT_PASS : EXIT_NUMERICAL_FAIL;
}

int cmd_caustic(int m, bool scan, const CommonArgs& args) {
    CausticModel model;
    model.m = m;
    model.n = 4;

    Report rep;
    rep.command = "caustic";
    rep.inputs_digest = digest_hex("caustic m=" + std::to_string(m));

    Matrix block = caustic_v11_limit(model);
    Eigen::ComplexEigenSolver<Matrix> es(block, false);
    Complex want = Complex(0.0, 1.0) * model.v12_ring();
    double e0 = std::min(std::abs(es.eigenvalues()(0) - want), std::abs(es.eigenvalues()(0) + want));
    double e1 = std::min(std::abs(es.eigenvalues()(1) - want), std::abs(es.eigenvalues()(1) + want));
    rep.add("v11_eigenvalues", std::max(e0, e1), 1e-12);
    rep.add("v11_trace", std::abs(block.trace()), 1e-13);

    if (scan) {
        Complex v = model.v12_ring();
        std::vector<Complex> candidates{v, v + Complex(0.05, 0.0), v - Complex(0.05, 0.0),
                                        Complex(0.0, 0.0)};
        std::vector<double> grid;
        for (int k = 1; k <= 6; ++k) grid.push_back(std::pow(10.0, -k));
        VringScan sc = vring_scan(model, candidates, grid);
        bool ok = true;
        for (std::size_t i = 0; i < sc.verdicts.size(); ++i) {
            bool expect_bounded = (i == 0) || (m == 2 && std::abs(sc.verdicts[i].candidate) == 0.0);
            if (sc.verdicts[i].bounded != expect_bounded) ok = false;
        }
        rep.add("vring_scan_dichotomy", ok ? 0.0 : 1.0, 0.5);
    }
    // Psi certificates away from the caustic
    if (m >= 3) {
        double worst = 0.0;
        for (double t2 : {1e-3, 1e-2, 1e-1}) {
            auto psi = caustic_psi(model, Complex(0.0, 0.0), Complex(t2, 0.0));
            worst = std::max({worst, psi.gram_residual, psi.diagonalization_residual});
        }
        rep.add("psi_certificates", worst, 1e-10);
    }

    emit(rep, args.out_path);
    return rep.pass() ? EXIT_PASS : EXIT_NUMERICAL_FAIL;
}

int cmd_example(const std::string& name, const CommonArgs& args) {
    SystemSpec spec = preset_spec(name);
    std::string text = dump_system_spec(spec);
    if (args.out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(args.out_path);
        out << text << "\n";
    }
    return EXIT_PASS;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"isomonodromic deformation laboratory for coalesced linear systems"};
    app.require_subcommand(1);

    CommonArgs args;
    int caustic_m = 3;
    bool caustic_scan = false;
    std::string example_name = "3d-example";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", args.spec_path, "system spec file (JSON)");
        sub->add_option("--preset", args.preset, "named preset (3d-example | 4d-omega | caustic)");
        sub->add_option("--out", args.out_path, "output file (default stdout)");
        sub->add_option("--format", args.format, "report | csv");
        sub->add_option("--tol", args.tol, "override tolerance");
        sub->add_option("--K", args.K, "series truncation override");
        sub->add_option("--samples", args.samples, "lambda samples for audits");
        sub->add_option("--path", args.path_file, "deformation path file (waypoints)");
    };

    auto* c_check = app.add_subcommand("check", "linear constraints and curl residuals");
    add_common(c_check);
    auto* c_flow = app.add_subcommand("flow", "integrate the deformation equations");
    add_common(c_flow);
    auto* c_mon = app.add_subcommand("monodromy", "strong-isomonodromy audit along a flow");
    add_common(c_mon);
    auto* c_caustic = app.add_subcommand("caustic", "caustic model certificates and scans");
    add_common(c_caustic);
    c_caustic->add_option("--m", caustic_m, "caustic exponent m >= 2");
    c_caustic->add_flag("--scan", caustic_scan, "run the V12 boundedness scan");
    auto* c_example = app.add_subcommand("example", "emit a preset system spec");
    add_common(c_example);
    c_example->add_option("--name", example_name, "preset name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_check->parsed()) return cmd_check(args);
        if (c_flow->parsed()) return cmd_flow(args);
        if (c_mon->parsed()) return cmd_monodromy(args);
        if (c_caustic->parsed()) return cmd_caustic(caustic_m, caustic_scan, args);
        if (c_example->parsed()) return cmd_example(example_name, args);
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return EXIT_INPUT_ERROR;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return EXIT_INPUT_ERROR;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_NUMERICAL_FAIL;
    }
    return EXIT_INPUT_ERROR;
}
