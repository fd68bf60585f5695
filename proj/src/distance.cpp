#include "unitlab/distance.hpp"

#include <cmath>

#include "unitlab/error.hpp"

namespace unitlab {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Angle between unit vectors via 2*atan2(|u-v|, |u+v|); exact at 0 and pi,
// unlike acos of the dot product.
double angularUnit(const Eigen::Ref<const Vector>& xu, const Eigen::Ref<const Vector>& yu) {
    double dn = (xu - yu).norm();
    double sn = (xu + yu).norm();
    return 2.0 * std::atan2(dn, sn) / kPi;
}

}  // namespace

FrameMetric frameMetricFromString(const std::string& name) {
    if (name == "angular") return FrameMetric::Angular;
    if (name == "euclidean") return FrameMetric::Euclidean;
    fail(ErrorKind::Domain, "unknown frame metric '" + name + "' (angular|euclidean)");
}

std::string toString(FrameMetric metric) {
    return metric == FrameMetric::Angular ? "angular" : "euclidean";
}

double frameDistance(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v,
                     FrameMetric metric) {
    require(u.size() == v.size(), ErrorKind::Domain, "frameDistance: dimension mismatch");
    if (metric == FrameMetric::Euclidean) return (u - v).norm();
    double nu = u.norm(), nv = v.norm();
    require(nu > 0.0 && nv > 0.0, ErrorKind::Domain,
            "frameDistance: zero vector under angular metric");
    return angularUnit(u / nu, v / nv);
}

Matrix frameDistanceMatrix(const Matrix& x, const Matrix& y, FrameMetric metric) {
    require(x.cols() == y.cols(), ErrorKind::Domain, "frameDistanceMatrix: dimension mismatch");
    require(x.rows() > 0 && y.rows() > 0, ErrorKind::Domain, "frameDistanceMatrix: empty input");
    Matrix out(x.rows(), y.rows());
    if (metric == FrameMetric::Euclidean) {
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < y.rows(); ++j)
                out(i, j) = (x.row(i) - y.row(j)).norm();
        return out;
    }
    Vector xn = x.rowwise().norm();
    Vector yn = y.rowwise().norm();
    require(xn.minCoeff() > 0.0 && yn.minCoeff() > 0.0, ErrorKind::Domain,
            "frameDistanceMatrix: zero vector under angular metric");
    Matrix xu = xn.cwiseInverse().asDiagonal() * x;
    Matrix yu = yn.cwiseInverse().asDiagonal() * y;
    for (Eigen::Index i = 0; i < xu.rows(); ++i)
        for (Eigen::Index j = 0; j < yu.rows(); ++j)
            out(i, j) = angularUnit(xu.row(i).transpose(), yu.row(j).transpose());
    return out;
}

double dtwFromCosts(const Matrix& costs) {
    const Eigen::Index n = costs.rows(), m = costs.cols();
    require(n > 0 && m > 0, ErrorKind::Domain, "dtwFromCosts: empty cost matrix");
    Matrix acc(n, m);
    // len(i,j): shortest length among cost-optimal paths ending at (i,j);
    // min over the predecessor set, so the result is mirror-symmetric.
    Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> len(n, m);
    acc(0, 0) = costs(0, 0);
    len(0, 0) = 1;
    for (Eigen::Index i = 1; i < n; ++i) {
        acc(i, 0) = acc(i - 1, 0) + costs(i, 0);
        len(i, 0) = len(i - 1, 0) + 1;
    }
    for (Eigen::Index j = 1; j < m; ++j) {
        acc(0, j) = acc(0, j - 1) + costs(0, j);
        len(0, j) = len(0, j - 1) + 1;
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index j = 1; j < m; ++j) {
            double best = acc(i - 1, j - 1);
            std::int32_t best_len = len(i - 1, j - 1);
            if (acc(i - 1, j) < best || (acc(i - 1, j) == best && len(i - 1, j) < best_len)) {
                best = acc(i - 1, j);
                best_len = len(i - 1, j);
            }
            if (acc(i, j - 1) < best || (acc(i, j - 1) == best && len(i, j - 1) < best_len)) {
                best = acc(i, j - 1);
                best_len = len(i, j - 1);
            }
            acc(i, j) = best + costs(i, j);
            len(i, j) = best_len + 1;
        }
    }
    return acc(n - 1, m - 1) / static_cast<double>(len(n - 1, m - 1));
}

double dtwDistance(const Matrix& x, const Matrix& y, FrameMetric metric) {
    require(x.rows() > 0 && y.rows() > 0, ErrorKind::Domain, "dtwDistance: empty input");
    return dtwFromCosts(frameDistanceMatrix(x, y, metric));
}

}  // namespace unitlab
