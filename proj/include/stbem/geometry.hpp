#ifndef STBEM_GEOMETRY_HPP
#define STBEM_GEOMETRY_HPP

#include <Eigen/Dense>

namespace stbem {

double point_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b);

double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c);

double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2, const Eigen::Vector3d& q2);

/// Minimum distance between two triangles (0 when they touch or intersect).
double triangle_min_distance(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                             const Eigen::Vector3d& a2, const Eigen::Vector3d& b0,
                             const Eigen::Vector3d& b1, const Eigen::Vector3d& b2);

/// Maximum distance between two triangles (attained at vertices).
double triangle_max_distance(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                             const Eigen::Vector3d& a2, const Eigen::Vector3d& b0,
                             const Eigen::Vector3d& b1, const Eigen::Vector3d& b2);

}  // namespace stbem

#endif
