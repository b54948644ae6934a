#pragma once

#include <cstdint>
#include <string>

#include "shaperank/geometry/mesh.hpp"

namespace shaperank::synth {

// Parametric shape families used to build synthetic corpora.  Every family
// exposes one or two "knobs" with a known, monotone effect on at least one
// geometric descriptor, which is what makes planted-ground-truth experiments
// possible.
enum class Generator {
  kBox,        // axis-aligned box, knobs: size_x/size_y/size_z
  kCylinder,   // capped cylinder, knobs: radius, height, segments
  kLathe,      // surface of revolution with a wavy profile, knob: wiggle
  kProngUnion, // disjoint union of vertical square prongs, knob: prongs
  kCavityBox,  // box with an open square cavity, knob: cavity_fraction
};

const char* generator_name(Generator g);
Generator parse_generator(const std::string& name);  // throws InputError

struct ShapeSpec {
  Generator kind = Generator::kBox;

  // Box.
  double size_x = 1.0;
  double size_y = 1.0;
  double size_z = 1.0;

  // Cylinder / lathe.
  double radius = 0.5;
  double height = 1.0;
  int segments = 32;

  // Lathe: radial modulation r(z) = radius * (1 + wiggle * sin(2*pi*lobes*z/h)).
  double wiggle = 0.0;
  int wiggle_lobes = 3;
  int rings = 64;

  // Prong union.
  int prongs = 3;
  double prong_length = 1.0;

  // Cavity box (unit outer cube, cavity side and depth = cavity_fraction).
  double cavity_fraction = 0.5;

  // Reserved for stochastic families; current generators are fully
  // parametric, so equal specs produce bit-identical meshes.
  std::uint64_t seed = 0;
};

// Builds the mesh for a spec.  Throws InputError when a knob is outside its
// documented range.  Output is watertight and consistently wound.
geom::Mesh generate_shape(const ShapeSpec& spec);

}  // namespace shaperank::synth
