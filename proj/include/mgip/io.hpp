#pragma once

#include <filesystem>
#include <iosfwd>

#include "mgip/assembly.hpp"
#include "mgip/forward.hpp"
#include "mgip/sampler.hpp"

namespace mgip {

// All tables are comma separated with a header row and '.' decimals. Values
// are printed with 17 significant digits so they reload bit-exactly.

/// Columns edge_id,t,z1,z2,value; one row per node per edge, so vertex values
/// repeat on every incident edge.
void write_field_csv(std::ostream& out, const Field& field);
void write_field_csv(const std::filesystem::path& path, const Field& field);
Field read_field_csv(const std::filesystem::path& path, MeshPtr mesh, FieldRole role = FieldRole::Generic);
Field read_field_csv(std::istream& in, MeshPtr mesh, FieldRole role = FieldRole::Generic);

/// Columns obs_id,edge_id,t,y,sigma. Only pointwise functionals can be written.
void write_observations_csv(const std::filesystem::path& path, const Mesh& mesh, const ObservationSet& obs);
ObservationSet read_observations_csv(const std::filesystem::path& path, const Mesh& mesh);

/// Columns n,accepted,tau,T,phi,prior_quad.
void write_trace_csv(const std::filesystem::path& path, const ChainResult& result);

/// Columns j,lambda,weyl_ratio with weyl_ratio = lambda_j / j^2.
void write_eigenvalues_csv(const std::filesystem::path& path, const Eigen::VectorXd& eigenvalues);

}  // namespace mgip
