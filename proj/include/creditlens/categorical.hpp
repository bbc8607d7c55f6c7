#pragma once

#include <vector>

#include "creditlens/distributions.hpp"
#include "creditlens/mdp.hpp"

namespace creditlens {

/**
 * Distributional policy evaluation on a fixed categorical grid. Return
 * distributions are represented as probability vectors over `grid` and the
 * backward recursion pushes r + gamma*z through a two-point linear projection
 * onto neighboring atoms (mass-preserving, and mean-preserving away from the
 * clamped edges).
 *
 * The grid spans [min(minR, G*minR), max(maxR, G*maxR)] with G the discounted
 * mass, so every suffix-length return support is contained. A degenerate span
 * (constant reward) is widened by +-0.5; the default odd atom count then
 * centers the exact return value on an atom.
 */
struct CategoricalTable {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> grid;  // ascending, size num_atoms
  std::vector<double> mass;  // [((h*S + s)*A + a)*num_atoms + j]

  double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
  std::span<const double> mass_at(int h, int s, int a) const {
    std::size_t base =
        ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
        grid.size();
    return std::span<const double>(mass).subspan(base, grid.size());
  }
  double mean_at(int h, int s, int a) const;
  // Grid atoms with zero mass dropped; values are exact grid points.
  DiscreteDist dist_at(int h, int s, int a) const;
};

CategoricalTable categorical_return_dp(const Mdp& m, const TabularPolicy& p,
                                       int num_atoms = 201);

}  // namespace creditlens
