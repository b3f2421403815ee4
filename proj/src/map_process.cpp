#include "supermap/map_process.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace supermap {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kResidualTol = 1e-8;
constexpr double kRcondFloor = 1e-12;
constexpr double kRhoOverflowTol = 1e-9;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

void check_structure(const MarkovArrivalProcess& map) {
    if (map.d0.size() == 0 || map.d1.size() == 0)
        throw_structural("MAP matrices must be present and non-empty");
    if (map.d0.rows() != map.d0.cols() || map.d1.rows() != map.d1.cols())
        throw_structural("MAP matrices must be square");
    if (map.d0.rows() != map.d1.rows())
        throw_structural("d0 and d1 must have identical dimension");
    if (!map.d0.allFinite() || !map.d1.allFinite())
        throw_structural("MAP matrices contain non-finite entries");
}

}  // namespace

MarkovArrivalProcess MarkovArrivalProcess::poisson(double rate) {
    if (!(rate > 0.0)) throw_config("Poisson rate must be positive");
    MarkovArrivalProcess map;
    map.d0 = Matrix::Constant(1, 1, -rate);
    map.d1 = Matrix::Constant(1, 1, rate);
    return map;
}

std::string ValidationIssue::describe() const {
    std::ostringstream os;
    os << condition;
    if (row >= 0) {
        os << " at (" << row;
        if (col >= 0) os << "," << col;
        os << ")";
    }
    return os.str();
}

std::string ValidationReport::describe() const {
    if (ok) return "ok";
    std::string out;
    for (const auto& issue : issues) {
        if (!out.empty()) out += "; ";
        out += issue.describe();
    }
    return out;
}

ValidationReport validate_map(const MarkovArrivalProcess& map) {
    check_structure(map);
    ValidationReport report;
    const int n = map.dim();

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (map.d1(i, j) < 0.0) report.issues.push_back({"d1 entry < 0", i, j});
            if (i != j && map.d0(i, j) < 0.0)
                report.issues.push_back({"d0 off-diagonal < 0", i, j});
        }
        if (!(map.d0(i, i) < 0.0)) report.issues.push_back({"d0 diagonal not negative", i, i});
    }

    const Vector row_sums = (map.d0 + map.d1).rowwise().sum();
    for (int i = 0; i < n; ++i)
        if (std::abs(row_sums(i)) > kRowSumTol) report.issues.push_back({"row sum != 0", i, -1});

    Eigen::PartialPivLU<Matrix> lu(map.d0);
    const double rcond = lu.rcond();
    if (!std::isfinite(rcond) || rcond < 1e-14)
        report.issues.push_back({"d0 singular or near-singular", -1, -1});

    report.ok = report.issues.empty();
    return report;
}

void require_valid(const MarkovArrivalProcess& map) {
    const ValidationReport report = validate_map(map);
    if (!report.ok) throw_structural("invalid MAP: " + report.describe());
}

StationaryContext stationary_context(const MarkovArrivalProcess& map) {
    require_valid(map);
    const int n = map.dim();
    const Matrix generator = map.d0 + map.d1;

    // pi solves pi*generator = 0 with pi*1 = 1: transpose the balance
    // equations and swap the last one for the normalization row.
    Matrix system = generator.transpose();
    system.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;

    Eigen::PartialPivLU<Matrix> lu(system);
    const double rcond = lu.rcond();
    if (!std::isfinite(rcond) || rcond < kRcondFloor)
        throw_analysis("stationary solve ill-conditioned (rcond estimate " +
                       std::to_string(rcond) + ")");

    Vector pi_col = lu.solve(rhs);
    const double residual = (pi_col.transpose() * generator).cwiseAbs().maxCoeff();
    if (!(residual <= kResidualTol))
        throw_analysis("stationary residual too large: " + std::to_string(residual));

    // Roundoff can leave tiny negatives; anything beyond roundoff scale is
    // a reducibility symptom and rejected.
    for (int i = 0; i < n; ++i) {
        if (pi_col(i) < 0.0) {
            if (pi_col(i) < -1e-10)
                throw_analysis("stationary law has a negative component: " +
                               std::to_string(pi_col(i)));
            pi_col(i) = 0.0;
        }
    }
    pi_col /= pi_col.sum();

    StationaryContext ctx;
    ctx.pi = pi_col.transpose();
    RowVector flow = ctx.pi * map.d1;
    ctx.rate = flow.sum();
    if (!(ctx.rate > 0.0)) throw_analysis("arrival rate is not positive");
    ctx.phi = flow / ctx.rate;
    return ctx;
}

MapAnalyzer::MapAnalyzer(const MarkovArrivalProcess& map)
    : d1_(map.d1), neg_d0_(-map.d0), lu_(neg_d0_), ctx_(stationary_context(map)) {
    const double rcond = lu_.rcond();
    if (!std::isfinite(rcond) || rcond < kRcondFloor)
        throw_analysis("-d0 factorization ill-conditioned (rcond estimate " +
                       std::to_string(rcond) + ")");
}

std::vector<RowVector> MapAnalyzer::left_powers_(int n) const {
    std::vector<RowVector> rows;
    rows.reserve(static_cast<std::size_t>(n));
    Vector v = ctx_.phi.transpose();
    for (int a = 1; a <= n; ++a) {
        v = lu_.transpose().solve(v).eval();
        rows.push_back(v.transpose());
    }
    return rows;
}

std::vector<Vector> MapAnalyzer::right_powers_(int n) const {
    std::vector<Vector> cols;
    cols.reserve(static_cast<std::size_t>(n));
    Vector v = Vector::Ones(neg_d0_.rows());
    for (int a = 1; a <= n; ++a) {
        v = lu_.solve(v).eval();
        cols.push_back(v);
    }
    return cols;
}

RowVector MapAnalyzer::step_(const RowVector& row) const {
    const Vector through = lu_.transpose().solve(row.transpose());
    return through.transpose() * d1_;
}

std::vector<double> MapAnalyzer::interarrival_moments(int n_mom) const {
    if (n_mom < 1) throw_config("n_mom must be >= 1");
    const auto cols = right_powers_(n_mom);
    std::vector<double> moments(static_cast<std::size_t>(n_mom));
    for (int i = 1; i <= n_mom; ++i) {
        const double m = factorial(i) * ctx_.phi.dot(cols[static_cast<std::size_t>(i - 1)].transpose());
        if (!(m > 0.0) || !std::isfinite(m))
            throw_analysis("inter-arrival moment m(" + std::to_string(i) + ") is not positive");
        moments[static_cast<std::size_t>(i - 1)] = m;
    }
    return moments;
}

namespace {

// Shared clamp/degeneracy policy for correlation cells: overflow within
// tolerance is roundoff and clamped, anything larger is a bug surfaced as
// an analysis error.
double finalize_rho(double cov, double var1, double var2, double scale1, double scale2) {
    if (!(var1 > scale1 * 1e-12) || !(var2 > scale2 * 1e-12))
        throw_degenerate("degenerate variance: inter-arrival power is deterministic");
    const double rho = cov / std::sqrt(var1 * var2);
    if (!std::isfinite(rho)) throw_analysis("autocorrelation is non-finite");
    if (std::abs(rho) > 1.0 + kRhoOverflowTol)
        throw_analysis("autocorrelation escapes [-1,1]: " + std::to_string(rho));
    return std::clamp(rho, -1.0, 1.0);
}

}  // namespace

double MapAnalyzer::lag_autocorrelation(int k, int a1, int a2) const {
    if (k < 1 || a1 < 1 || a2 < 1) throw_config("lag and powers must be >= 1");
    const int max_pow = std::max(a1, a2);
    const auto moments = interarrival_moments(2 * max_pow);
    const auto left = left_powers_(max_pow);
    const auto right = right_powers_(max_pow);

    RowVector row = left[static_cast<std::size_t>(a1 - 1)];
    for (int step = 0; step < k; ++step) row = step_(row);
    const double joint =
        factorial(a1) * factorial(a2) * row.dot(right[static_cast<std::size_t>(a2 - 1)].transpose());

    auto m = [&](int i) { return moments[static_cast<std::size_t>(i - 1)]; };
    const double cov = joint - m(a1) * m(a2);
    const double var1 = m(2 * a1) - m(a1) * m(a1);
    const double var2 = m(2 * a2) - m(a2) * m(a2);
    return finalize_rho(cov, var1, var2, m(2 * a1), m(2 * a2));
}

DescriptorSet MapAnalyzer::descriptor_set(int n_mom, int n_lag, int n_pow) const {
    DescriptorGrid grid{n_mom, n_lag, n_pow};
    grid.validate();

    const int mom_needed = std::max(n_mom, 2 * n_pow);
    const auto moments = interarrival_moments(mom_needed);
    auto m = [&](int i) { return moments[static_cast<std::size_t>(i - 1)]; };

    DescriptorSet out;
    out.grid = grid;
    out.moments.assign(moments.begin(), moments.begin() + n_mom);
    out.autocorr.assign(static_cast<std::size_t>(grid.autocorr_size()), 0.0);

    const auto left = left_powers_(n_pow);
    const auto right = right_powers_(n_pow);
    std::vector<double> variances(static_cast<std::size_t>(n_pow));
    for (int a = 1; a <= n_pow; ++a)
        variances[static_cast<std::size_t>(a - 1)] = m(2 * a) - m(a) * m(a);

    for (int a1 = 1; a1 <= n_pow; ++a1) {
        RowVector row = left[static_cast<std::size_t>(a1 - 1)];
        for (int k = 1; k <= n_lag; ++k) {
            row = step_(row);
            for (int a2 = 1; a2 <= n_pow; ++a2) {
                const double joint = factorial(a1) * factorial(a2) *
                                     row.dot(right[static_cast<std::size_t>(a2 - 1)].transpose());
                const double cov = joint - m(a1) * m(a2);
                out.autocorr[grid.autocorr_index(k, a1, a2)] =
                    finalize_rho(cov, variances[static_cast<std::size_t>(a1 - 1)],
                                 variances[static_cast<std::size_t>(a2 - 1)], m(2 * a1), m(2 * a2));
            }
        }
    }
    return out;
}

std::vector<double> interarrival_moments(const MarkovArrivalProcess& map, int n_mom) {
    return MapAnalyzer(map).interarrival_moments(n_mom);
}

double lag_autocorrelation(const MarkovArrivalProcess& map, int k, int a1, int a2) {
    return MapAnalyzer(map).lag_autocorrelation(k, a1, a2);
}

DescriptorSet descriptor_set(const MarkovArrivalProcess& map, int n_mom, int n_lag, int n_pow) {
    return MapAnalyzer(map).descriptor_set(n_mom, n_lag, n_pow);
}

MarkovArrivalProcess superpose(const MarkovArrivalProcess& a, const MarkovArrivalProcess& b,
                               int dim_cap) {
    require_valid(a);
    require_valid(b);
    const long merged = static_cast<long>(a.dim()) * b.dim();
    if (merged > dim_cap)
        throw_capacity("merged dimension " + std::to_string(merged) + " exceeds cap " +
                       std::to_string(dim_cap));

    const Matrix ia = Matrix::Identity(a.dim(), a.dim());
    const Matrix ib = Matrix::Identity(b.dim(), b.dim());
    MarkovArrivalProcess out;
    out.d0 = kron(a.d0, ib) + kron(ia, b.d0);
    out.d1 = kron(a.d1, ib) + kron(ia, b.d1);
    return out;
}

MarkovArrivalProcess time_scale(const MarkovArrivalProcess& map, double target_mean) {
    if (!(target_mean > 0.0)) throw_config("target mean must be positive");
    MapAnalyzer analyzer(map);
    const double m1 = analyzer.interarrival_moments(1)[0];
    const double c = m1 / target_mean;
    return {c * map.d0, c * map.d1};
}

std::string map_to_json(const MarkovArrivalProcess& map) {
    check_structure(map);
    nlohmann::json j;
    const int n = map.dim();
    j["dim"] = n;
    auto flatten = [n](const Matrix& m) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) flat.push_back(m(i, k));
        return flat;
    };
    j["d0"] = flatten(map.d0);
    j["d1"] = flatten(map.d1);
    return j.dump();
}

MarkovArrivalProcess map_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_io(std::string("MAP JSON parse failure: ") + e.what());
    }
    if (!j.contains("dim") || !j.contains("d0") || !j.contains("d1"))
        throw_io("MAP JSON requires fields dim, d0, d1");
    const int n = j["dim"].get<int>();
    if (n <= 0) throw_io("MAP JSON dim must be positive");
    auto unflatten = [n](const nlohmann::json& arr) {
        if (!arr.is_array() || arr.size() != static_cast<std::size_t>(n) * n)
            throw_io("MAP JSON matrix has wrong length");
        Matrix m(n, n);
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) m(i, k) = arr[idx++].get<double>();
        return m;
    };
    MarkovArrivalProcess map;
    map.d0 = unflatten(j["d0"]);
    map.d1 = unflatten(j["d1"]);
    return map;
}

void write_map_json(const MarkovArrivalProcess& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw_io("cannot open for writing: " + path.string());
    out << map_to_json(map) << "\n";
    if (!out) throw_io("write failure: " + path.string());
}

MarkovArrivalProcess read_map_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open MAP file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return map_from_json(buf.str());
}

}  // namespace supermap
