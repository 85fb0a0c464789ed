/// @file reduced.hpp
/// Reduced bases and Galerkin-projected operators of the coupled
/// optimality system.
///
/// Test-space assignment: the state momentum row is tested with the
/// enriched state-velocity basis z_vs, the adjoint momentum row with the
/// enriched adjoint-velocity basis z_wr, the state continuity row with the
/// adjoint-pressure basis z_q, the adjoint continuity row with the
/// state-pressure basis z_p, and the optimality row with the control basis
/// z_u.  This pairing keeps both momentum diagonal blocks symmetric
/// positive definite and routes each pressure through the divergence
/// coupling of the opposite velocity family, which the supremizer
/// enrichment makes full rank.
///
/// Velocity fields are represented as z_vs coefficients plus an explicit
/// inflow lift: v(t) = z_vs vhat(t) + L g(t), where L holds one shape per
/// inlet and g(t) the per-inlet inflow coefficients.  All operator blocks
/// involving the lift are projected offline so the online stage never
/// touches a full-order object.

#pragma once

#include "ocflow/core/io.hpp"
#include "ocflow/fem/assemble.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ocflow::rom {

using ocflow::Mat;
using ocflow::SpMat;
using ocflow::Vec;

/// The five reduced bases plus the inflow lift shapes (full height).
struct ReducedBasisSet {
  Mat z_vs;  ///< state velocity, supremizer-enriched, X_V-orthonormal
  Mat z_wr;  ///< adjoint velocity, supremizer-enriched, X_V-orthonormal
  Mat z_p;   ///< state pressure, Mp-orthonormal
  Mat z_q;   ///< adjoint pressure, Mp-orthonormal
  Mat z_u;   ///< control, R-orthonormal
  Mat lift;  ///< inlet lift shapes, one column per inlet
};

void save_basis_set(const std::string& path, const ReducedBasisSet& basis,
                    std::uint64_t cfg_hash);
ReducedBasisSet load_basis_set(const std::string& path,
                               std::uint64_t* cfg_hash = nullptr);

/// Fingerprint of the raw basis bytes in fixed member order; stored inside
/// the reduced-operator file so a mismatched basis/operator pair is
/// rejected.
std::uint64_t basis_fingerprint(const ReducedBasisSet& basis);

/// Dense projections of every operator appearing in the reduced coupled
/// system, plus the trilinear convection tensor over the combined velocity
/// columns Y = [z_vs | z_wr | L].
struct ReducedOperators {
  int n_vs = 0, n_wr = 0, n_p = 0, n_q = 0, n_u = 0, n_lift = 0;

  // adjoint momentum row (tested with z_wr)
  Mat md;       ///< z_wr^T Md z_vs
  Mat m_wr;     ///< z_wr^T M z_wr
  Mat a_wr;     ///< z_wr^T A z_wr
  Mat b_wr_q;   ///< z_q^T B z_wr (enters the row transposed, negated)
  Vec g_track;  ///< z_wr^T Md vd
  Mat l_md;     ///< z_wr^T Md L

  // adjoint continuity row (tested with z_p)
  Mat b_wr_p;  ///< z_p^T B z_wr

  // optimality row (tested with z_u)
  Mat r_u;    ///< z_u^T R z_u
  Mat mg_wr;  ///< z_u^T Mg z_wr

  // state momentum row (tested with z_vs)
  Mat m_vs;     ///< z_vs^T M z_vs
  Mat a_vs;     ///< z_vs^T A z_vs
  Mat bt_vs_p;  ///< z_vs^T B^T z_p
  Mat c_vs;     ///< z_vs^T C z_u with C = -Mg^T
  Mat l_a;      ///< z_vs^T A L
  Mat l_m;      ///< z_vs^T M L

  // state continuity row (tested with z_q)
  Mat b_vs_q;  ///< z_q^T B z_vs
  Mat l_b;     ///< z_q^T B L

  // tracking-cost blocks (observation mass Md and control penalty R)
  Mat md_vs;          ///< z_vs^T Md z_vs
  Mat l_md_vs;        ///< z_vs^T Md L
  Mat l_md_l;         ///< L^T Md L
  Vec vd_md_vs;       ///< z_vs^T Md vd
  Vec vd_md_lift;     ///< L^T Md vd
  double vd_md_vd = 0.0;

  /// conv[a](i, j) = e(Y_a, Y_j, Y_i): convection of trial column j by
  /// advecting column a, tested against column i, over all combined
  /// velocity columns.
  std::vector<Mat> conv;

  int n_y() const { return n_vs + n_wr + n_lift; }
};

/// Projects all blocks; `vd` is the full-order tracking target.  The
/// convection tensor assembly (one sparse operator per combined velocity
/// column) is spread over `workers` threads.
ReducedOperators project_operators(const fem::VectorSpaces& vs,
                                   const fem::Operators& ops,
                                   const ReducedBasisSet& basis,
                                   const Vec& vd, int workers = 1);

void save_reduced_operators(const std::string& path,
                            const ReducedOperators& red,
                            std::uint64_t cfg_hash,
                            std::uint64_t basis_hash);
ReducedOperators load_reduced_operators(const std::string& path,
                                        std::uint64_t* cfg_hash = nullptr,
                                        std::uint64_t* basis_hash = nullptr);

}  // namespace ocflow::rom
