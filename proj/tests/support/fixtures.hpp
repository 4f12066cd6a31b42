#pragma once

#include <random>
#include <utility>

#include "tpc/verify.hpp"

namespace tpc::testing {

inline ManifoldModel euclidean2() { return ManifoldModel({Euclidean{2}}); }
inline ManifoldModel sphere2() { return ManifoldModel({Sphere{2, 1.0}}); }
inline ManifoldModel sphere_product() { return ManifoldModel({Sphere{2, 1.0}, Sphere{2, 4.0}}); }

using tpc::random_pair;
using tpc::random_point;
using tpc::random_tangent;
using tpc::safe_distance;

}  // namespace tpc::testing
