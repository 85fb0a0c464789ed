/// @file generate.hpp
/// Structured mesh generators for the flow domains used throughout the
/// project: a straight planar channel, a planar symmetric bifurcation
/// (two inclined inlet branches merging through a junction into a straight
/// outlet trunk), and the 3D extrusion of the bifurcation.
///
/// All generators deliver validated meshes: positive cell orientation,
/// exactly tagged boundary facets, exact node sharing between structured
/// patches, a mirror-symmetric vertex set about the trunk axis (planar
/// domains), and a centerline whose binned radius keeps every wall vertex
/// within 5% of the local duct radius.

#pragma once

#include "ocflow/geometry/mesh.hpp"

namespace ocflow::geom {

struct ChannelSpec {
  double half_width = 0.5;  ///< channel half-height [mm]
  double length = 10.0;     ///< channel length [mm]
  double target_h = 0.25;   ///< requested mesh spacing [mm]
};

struct BifurcationSpec {
  double inlet_half_width = 1.0;  ///< half-width of each inlet branch [mm]
  double branch_angle = 0.5235987755982988;  ///< inclination vs. trunk [rad]
  double branch_length = 10.0;               ///< inlet branch length [mm]
  double outlet_length = 10.0;               ///< trunk length [mm]
  double target_h = 0.45;                    ///< requested mesh spacing [mm]
};

/// Straight channel [0,L] x [-H,H]; inlet at x=0, outlet at x=L.
Mesh make_channel(const ChannelSpec& spec);

/// Planar symmetric bifurcation.  Two branches of width 2*inlet_half_width
/// meet the trunk through an isosceles junction triangle whose apex sits on
/// the symmetry axis; the trunk occupies [0, outlet_length] with half-width
/// 2*inlet_half_width*cos(branch_angle).  The vertex set is exactly
/// mirror-symmetric about y = 0.
Mesh make_bifurcation_2d(const BifurcationSpec& spec);

/// Extrusion of the planar bifurcation to z in [-w, w] with
/// w = inlet_half_width, tetrahedralized with face-consistent prism splits.
/// The extrusion caps are tagged as walls.
Mesh make_bifurcation_3d(const BifurcationSpec& spec);

}  // namespace ocflow::geom
