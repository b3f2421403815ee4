#include "supermap/phase_type.hpp"

#include <cmath>

namespace supermap {

void require_valid_ph(const PhaseTypeDist& ph) {
    if (ph.t.size() == 0 || ph.t.rows() != ph.t.cols())
        throw_structural("PH subgenerator must be square and non-empty");
    if (ph.alpha.size() != ph.t.rows())
        throw_structural("PH initial vector length must match subgenerator dimension");
    if (!ph.t.allFinite() || !ph.alpha.allFinite())
        throw_structural("PH contains non-finite entries");
    const int n = ph.dim();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (ph.alpha(i) < 0.0) throw_structural("PH initial vector has a negative entry");
        sum += ph.alpha(i);
        if (!(ph.t(i, i) < 0.0)) throw_structural("PH subgenerator diagonal must be negative");
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i != j && ph.t(i, j) < 0.0)
                throw_structural("PH subgenerator off-diagonal must be nonnegative");
            row += ph.t(i, j);
        }
        if (row > 1e-12) throw_structural("PH subgenerator row sums must be <= 0");
    }
    if (std::abs(sum - 1.0) > 1e-10) throw_structural("PH initial vector must sum to 1");
}

PhaseTypeDist erlang_ph(int k, double mean) {
    if (k < 1) throw_config("Erlang order must be >= 1");
    if (!(mean > 0.0)) throw_config("Erlang mean must be positive");
    const double rate = k / mean;
    PhaseTypeDist ph;
    ph.alpha = RowVector::Zero(k);
    ph.alpha(0) = 1.0;
    ph.t = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        ph.t(i, i) = -rate;
        if (i + 1 < k) ph.t(i, i + 1) = rate;
    }
    return ph;
}

PhaseTypeDist hyperexp2_ph(double mean, double mix, double rate_ratio) {
    if (!(mean > 0.0)) throw_config("hyperexponential mean must be positive");
    if (!(mix > 0.0 && mix < 1.0)) throw_config("hyperexponential mix must lie in (0,1)");
    if (!(rate_ratio > 1.0)) throw_config("hyperexponential rate ratio must exceed 1");
    const double fast = (mix + (1.0 - mix) * rate_ratio) / mean;
    const double slow = fast / rate_ratio;
    PhaseTypeDist ph;
    ph.alpha = RowVector(2);
    ph.alpha << mix, 1.0 - mix;
    ph.t = Matrix::Zero(2, 2);
    ph.t(0, 0) = -fast;
    ph.t(1, 1) = -slow;
    return ph;
}

PhaseTypeDist mix_ph(const PhaseTypeDist& ph1, const PhaseTypeDist& ph2, double w) {
    if (!(w > 0.0 && w < 1.0)) throw_config("mixture weight must lie in (0,1)");
    require_valid_ph(ph1);
    require_valid_ph(ph2);
    const int n1 = ph1.dim(), n2 = ph2.dim();
    PhaseTypeDist ph;
    ph.alpha = RowVector(n1 + n2);
    ph.alpha.head(n1) = w * ph1.alpha;
    ph.alpha.tail(n2) = (1.0 - w) * ph2.alpha;
    ph.t = Matrix::Zero(n1 + n2, n1 + n2);
    ph.t.topLeftCorner(n1, n1) = ph1.t;
    ph.t.bottomRightCorner(n2, n2) = ph2.t;
    return ph;
}

std::vector<double> ph_moments(const PhaseTypeDist& ph, int n_mom) {
    if (n_mom < 1) throw_config("n_mom must be >= 1");
    require_valid_ph(ph);
    Eigen::PartialPivLU<Matrix> lu(Matrix(-ph.t));
    std::vector<double> moments(static_cast<std::size_t>(n_mom));
    Vector v = Vector::Ones(ph.dim());
    double fac = 1.0;
    for (int i = 1; i <= n_mom; ++i) {
        v = lu.solve(v).eval();
        fac *= i;
        moments[static_cast<std::size_t>(i - 1)] = fac * ph.alpha.dot(v.transpose());
    }
    return moments;
}

double ph_mean(const PhaseTypeDist& ph) { return ph_moments(ph, 1)[0]; }

double ph_scv(const PhaseTypeDist& ph) {
    const auto m = ph_moments(ph, 2);
    return m[1] / (m[0] * m[0]) - 1.0;
}

PhaseTypeDist scale_ph_mean(const PhaseTypeDist& ph, double target_mean) {
    if (!(target_mean > 0.0)) throw_config("target mean must be positive");
    const double c = ph_mean(ph) / target_mean;
    return {ph.alpha, c * ph.t};
}

MarkovArrivalProcess renewal_map(const PhaseTypeDist& ph) {
    require_valid_ph(ph);
    MarkovArrivalProcess map;
    map.d0 = ph.t;
    map.d1 = ph.exit_rates() * ph.alpha;
    return map;
}

}  // namespace supermap
