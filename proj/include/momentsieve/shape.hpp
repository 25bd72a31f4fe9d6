#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "momentsieve/atomic.hpp"
#include "momentsieve/core.hpp"
#include "momentsieve/momentgen.hpp"

namespace momentsieve {
namespace shape {

/// s_j(r) = int <x, r>^j for j = 0..jmax, with r a unit vector.
struct DirectionalMoments {
  Vector r;
  MomentSequence t;
};

/// s_j(r) = sum_{|alpha| = j} j!/alpha! r^alpha s_alpha. The direction is normalised.
DirectionalMoments directionalize(const MomentSequence& s, const Vector& r, int jmax);

struct ShapeOptions {
  double fit_tol = 1e-9;    ///< Residual accepted by the atomic fit.
  double rank_tol = 1e-11;
  double match_tol = 1e-6;  ///< Cross-direction vertex matching.
};

/// Signed atoms of d^n applied to a directional sequence.
struct Projections {
  std::vector<double> positions;  ///< Ascending.
  std::vector<double> weights;
  double residual = 0.0;
  double condition = 0.0;
};

/// Atoms of the n-th derivative of the projected measure, at most k of them.
Projections projections_from_directional(const DirectionalMoments& t, int n, int k,
                                         const ShapeOptions& opts = {});

/// max_{j < n} |sum_i w_i xi_i^j| / sum_i |w_i| |xi_i|^j
double low_order_defect(const Projections& p, int n);

struct PolytopeModel {
  std::vector<Vector> vertices;  ///< Sorted lexicographically.
  std::vector<Projections> per_direction;
  double max_match_error = 0.0;
};

/// Vertex recovery from n+1 directions: candidates from the first n hyperplane families,
/// kept when direction n+1 confirms them.
PolytopeModel recover_polytope_vertices(const MomentSequence& s, int k,
                                        const std::vector<Vector>& directions,
                                        const ShapeOptions& opts = {});

/// Projections of all vertices of a signed sum of polytopes, d_total atoms at most.
Projections recover_polytope_simple_function(const MomentSequence& s, int d_total, const Vector& r,
                                             const ShapeOptions& opts = {});

struct BoxGrid {
  std::vector<std::vector<double>> coords;  ///< Per axis, ascending.
  std::vector<std::string> notes;           ///< Shortfalls against 2k coordinates per axis.
};

/// Per-axis facet coordinates: atoms of the first derivative of each axis subsequence.
BoxGrid recover_box_grid(const MomentSequence& s, int k, const ShapeOptions& opts = {});

struct BoxOptions {
  ShapeOptions shape;
  double vertex_tol = 1e-3;    ///< Corner weights below this fraction of the largest are zero.
  double fit_tol = 1e-8;       ///< Relative moment residual of the assembled arrangement.
  bool projection_check = true;  ///< Confirm vertices along one direction when the degree allows.
  int direction_candidates = 64;
};

struct BoxArrangement {
  std::vector<gen::Box> boxes;  ///< Sorted by lower corner.
  BoxGrid grid;
  double residual = 0.0;
  Vector direction;                   ///< Max-min-gap direction over the grid.
  bool projection_checked = false;
  double projection_error = 0.0;      ///< Max distance of vertex projections to recovered atoms.
};

BoxArrangement recover_box_arrangement(const MomentSequence& s, int k, const BoxOptions& opts = {});

/// Halton points on the unit sphere (half of it; r and -r are equivalent here).
std::vector<Vector> halton_directions(std::size_t n, int count);

/// Among `count` Halton directions, the one maximising the smallest gap between projections.
Vector max_min_gap_direction(const std::vector<Vector>& points, int count = 64);

/// Gaussian unit directions from a seeded generator.
std::vector<Vector> random_directions(std::size_t n, int count, std::uint64_t seed);

}  // namespace shape
}  // namespace momentsieve
