#pragma once

#include <string>

#include "unitlab/types.hpp"

namespace unitlab {

enum class FrameMetric { Angular, Euclidean };

FrameMetric frameMetricFromString(const std::string& name);
std::string toString(FrameMetric metric);

// Angular: arccos of the clamped cosine similarity, scaled to [0, 1].
// Euclidean: L2 norm of the difference. Zero vectors are rejected under the
// angular metric.
double frameDistance(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v,
                     FrameMetric metric);

// Pairwise frame distances, rows of X against rows of Y.
Matrix frameDistanceMatrix(const Matrix& x, const Matrix& y, FrameMetric metric);

// Classic DTW with steps {(1,0),(0,1),(1,1)}: minimal summed frame distance
// along a monotone path, divided by the path length (number of cells; the
// shortest length among cost-optimal paths, which makes the value symmetric).
double dtwDistance(const Matrix& x, const Matrix& y, FrameMetric metric);

// DTW on a precomputed frame-distance matrix.
double dtwFromCosts(const Matrix& costs);

}  // namespace unitlab
