#include "isomono/specio.hpp"
#include "isomono/showcase.hpp"

#include <json.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace isomono {

using json = nlohmann::ordered_json;

namespace {

Complex parse_complex(const json& v, const std::string& where) {
    if (v.is_number()) return Complex(v.get<double>(), 0.0);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ParseError(where + ": complex values are [re, im] pairs");
    return Complex(v[0].get<double>(), v[1].get<double>());
}

Matrix parse_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ParseError(where + ": expected a matrix (array of rows)");
    const int rows = static_cast<int>(v.size());
    const int cols = static_cast<int>(v[0].size());
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!v[static_cast<std::size_t>(i)].is_array() ||
            static_cast<int>(v[static_cast<std::size_t>(i)].size()) != cols)
            throw ParseError(where + ": ragged matrix rows");
        for (int j = 0; j < cols; ++j)
            M(i, j) = parse_complex(v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                    where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return M;
}

json complex_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(complex_json(M(i, j)));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

CoalescedSystem CoalescedSystemFromSpec(const SystemSpec& spec) {
    BlockPartition part(spec.partition);
    Lambda lam(spec.lambda, part);
    CoalescedSystem sys(lam, spec.A, spec.to_dspec());
    sys.eig_sep_tol = spec.eig_sep_tol;
    if (spec.T && spec.J)
        sys.reducer = jordanization_from_given(spec.A, part, *spec.T, *spec.J);
    return sys;
}

CoalescedSystem SystemSpec::to_system() const { return CoalescedSystemFromSpec(*this); }

DSpec SystemSpec::to_dspec() const {
    if (dspec_kind == "zero") return DSpec::zero();
    if (dspec_kind == "explicit") return DSpec::explicit_matrices(dspec_matrices);
    if (dspec_kind == "3d-example") {
        ThreeDExample ex;
        return DSpec::from_callback([ex](const std::vector<Complex>& lam) {
            Complex x = lam.at(0) - lam.at(1);
            Matrix D = example3d_D_of_x(ex, x);
            return std::vector<Matrix>{D, -D};
        });
    }
    throw ParseError("dspec: unknown kind '" + dspec_kind + "'");
}

SystemSpec parse_system_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("spec: invalid JSON: ") + e.what());
    }
    SystemSpec spec;
    if (!j.contains("partition") || !j["partition"].is_array())
        throw ParseError("spec: missing 'partition' (array of block sizes)");
    for (const auto& p : j["partition"]) {
        if (!p.is_number_integer() || p.get<int>() < 1)
            throw ParseError("spec.partition: block sizes are positive integers");
        spec.partition.push_back(p.get<int>());
    }
    if (!j.contains("lambda") || !j["lambda"].is_array())
        throw ParseError("spec: missing 'lambda'");
    for (const auto& v : j["lambda"]) spec.lambda.push_back(parse_complex(v, "spec.lambda"));
    if (spec.lambda.size() != spec.partition.size())
        throw ParseError("spec: lambda needs one value per partition block");
    if (!j.contains("A")) throw ParseError("spec: missing 'A'");
    spec.A = parse_matrix(j["A"], "spec.A");
    int n = 0;
    for (int p : spec.partition) n += p;
    if (spec.A.rows() != n || spec.A.cols() != n)
        throw ParseError("spec.A: dimension does not match the partition");

    if (j.contains("T")) spec.T = parse_matrix(j["T"], "spec.T");
    if (j.contains("J")) spec.J = parse_matrix(j["J"], "spec.J");
    if (j.contains("dspec")) {
        const auto& d = j["dspec"];
        if (d.is_string()) {
            spec.dspec_kind = d.get<std::string>();
        } else if (d.is_object() && d.contains("explicit")) {
            spec.dspec_kind = "explicit";
            for (const auto& M : d["explicit"])
                spec.dspec_matrices.push_back(parse_matrix(M, "spec.dspec.explicit"));
        } else {
            throw ParseError("spec.dspec: 'zero', '3d-example', or {\"explicit\": [...]} expected");
        }
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        auto grab = [&](const char* key, double& into) {
            if (t.contains(key)) {
                if (!t[key].is_number()) throw ParseError(std::string("spec.tolerances.") + key);
                into = t[key].get<double>();
            }
        };
        grab("eig_sep_tol", spec.eig_sep_tol);
        grab("cluster_tol", spec.cluster_tol);
        grab("int_tol", spec.int_tol);
        grab("constraint_tol", spec.constraint_tol);
        grab("monitor_fail", spec.monitor_fail);
        grab("rtol", spec.rtol);
        if (t.contains("K_levelt")) spec.K_levelt = t["K_levelt"].get<int>();
        if (t.contains("K_formal")) spec.K_formal = t["K_formal"].get<int>();
    }
    // structural validation through the domain types
    try {
        spec.to_system();
    } catch (const std::exception& e) {
        throw ParseError(std::string("spec: ") + e.what());
    }
    return spec;
}

SystemSpec load_system_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open spec file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_system_spec(ss.str());
}

std::string dump_system_spec(const SystemSpec& spec) {
    json j;
    j["partition"] = spec.partition;
    json lam = json::array();
    for (const auto& v : spec.lambda) lam.push_back(complex_json(v));
    j["lambda"] = lam;
    j["A"] = matrix_json(spec.A);
    if (spec.T) j["T"] = matrix_json(*spec.T);
    if (spec.J) j["J"] = matrix_json(*spec.J);
    if (spec.dspec_kind == "explicit") {
        json ms = json::array();
        for (const auto& M : spec.dspec_matrices) ms.push_back(matrix_json(M));
        j["dspec"] = json{{"explicit", ms}};
    } else {
        j["dspec"] = spec.dspec_kind;
    }
    j["tolerances"] = json{{"eig_sep_tol", spec.eig_sep_tol}, {"int_tol", spec.int_tol},
                           {"constraint_tol", spec.constraint_tol}, {"monitor_fail", spec.monitor_fail},
                           {"rtol", spec.rtol}, {"K_levelt", spec.K_levelt},
                           {"K_formal", spec.K_formal}};
    return j.dump(2);
}

SystemSpec preset_spec(const std::string& name) {
    if (name == "3d-example") {
        ThreeDExample ex;
        SystemSpec spec;
        spec.partition = {1, 2};
        spec.lambda = {Complex(1.0, 0.0), Complex(0.0, 0.0)};
        spec.A = example3d_closed_form(ex, Complex(1.0, 0.0));
        return spec;
    }
    if (name == "4d-omega") {
        SystemSpec spec;
        spec.partition = {2, 1, 1};
        spec.lambda = {Complex(0.0, 0.0), Complex(0.5, 0.0), Complex(1.0, 0.0)};
        spec.A = skew4_from_phis({Complex(0.3, 0.0), Complex(0.3, 0.0), Complex(0.1, 0.0),
                                  Complex(0.1, 0.0), Complex(0.2, 0.0)});
        return spec;
    }
    if (name == "caustic") {
        // restricted caustic system at m = 3, n = 4
        SystemSpec spec;
        spec.partition = {2, 1, 1};
        spec.lambda = {Complex(0.0, 0.0), Complex(1.5, 0.0), Complex(2.5, 0.0)};
        Matrix off = Matrix::Zero(4, 4);
        off(0, 2) = Complex(0.21, 0.0);
        off(1, 2) = Complex(-0.13, 0.05);
        off(0, 3) = Complex(0.17, -0.02);
        off(1, 3) = Complex(0.08, 0.0);
        off(2, 0) = Complex(0.11, 0.0);
        off(2, 1) = Complex(0.19, 0.0);
        off(3, 0) = Complex(-0.07, 0.03);
        off(3, 1) = Complex(0.14, 0.0);
        off(2, 3) = Complex(0.05, 0.0);
        off(3, 2) = Complex(-0.04, 0.0);
        Matrix A = off;
        // V11 block for m = 3: eta11 = 0.3, eta12 = 1
        Complex i(0.0, 1.0);
        Complex v(0.0, 1.0 / 6.0);
        Matrix B(2, 2);
        B << Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(-0.3, 0.0), Complex(-1.0, 0.0);
        A.block(0, 0, 2, 2) = i * v * B;
        spec.A = A;
        return spec;
    }
    throw ParseError("unknown preset '" + name + "'");
}

// ---- reports -------------------------------------------------------------------

std::string digest_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void Report::add(const std::string& name, double value, double tolerance) {
    checks.push_back({name, value, tolerance, value <= tolerance});
}

bool Report::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string Report::verdict() const { return pass() ? "PASS" : "FAIL"; }

namespace {
std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}
} // namespace

std::string Report::to_json(bool include_timing) const {
    std::ostringstream os;
    os << "{\n";
    os << "  \"schema\": \"isomono-report/1\",\n";
    os << "  \"command\": \"" << command << "\",\n";
    os << "  \"inputs_digest\": \"" << inputs_digest << "\",\n";
    os << "  \"checks\": [\n";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        os << "    {\"name\": \"" << c.name << "\", \"value\": " << num17(c.value)
           << ", \"tolerance\": " << num17(c.tolerance) << ", \"pass\": "
           << (c.pass ? "true" : "false") << "}";
        os << (i + 1 < checks.size() ? ",\n" : "\n");
    }
    os << "  ],\n";
    os << "  \"verdict\": \"" << verdict() << "\"";
    if (include_timing) os << ",\n  \"wall_ms\": " << num17(wall_ms);
    os << "\n}\n";
    return os.str();
}

} // namespace isomono
