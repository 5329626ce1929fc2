#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "myo/math.hpp"

namespace myo {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed text (not valid JSON, wrong value kinds).
struct ParseError : ModelError {
    using ModelError::ModelError;
};
// Structurally valid text violating a model invariant; message carries the
// offending field path.
struct ValidationError : ModelError {
    using ModelError::ModelError;
};
struct VersionError : ModelError {
    using ModelError::ModelError;
};

enum class JointType { Free6, Planar3, Ball3, Revolute1 };

int joint_dof(JointType t);
const char* joint_type_name(JointType t);

struct GeomDesc {
    std::string type = "capsule";  // capsule | box
    double radius = 0.05;          // capsule
    double length = 0.2;           // capsule (axis length, local y)
    Vec3 half_extents = Vec3(0.05, 0.05, 0.05);  // box
};

// Link frame origin sits at the link's center of mass; inertia is about
// the COM in the link frame.
struct LinkDesc {
    std::string name;
    double mass = 1.0;
    Mat3 inertia = Mat3::Identity();
    GeomDesc geometry;
};

struct JointDesc {
    std::string name;
    std::string parent;  // link name or "world"
    std::string child;
    JointType type = JointType::Revolute1;
    Vec3 axis = Vec3::UnitZ();       // revolute only
    Vec3 parent_offset = Vec3::Zero();  // joint anchor in parent frame
    Vec3 child_offset = Vec3::Zero();   // joint anchor in child frame
    // per-DOF [lo, hi]; empty = unlimited
    std::vector<std::pair<double, double>> limits;
};

struct ViaPoint {
    std::string link;  // link name or "world"
    Vec3 offset = Vec3::Zero();
};

struct MuscleDesc {
    std::string name;
    double f_max = 1000.0;   // N, max isometric force
    double l_opt = 0.1;      // m, optimal fiber length
    double l_slack = 0.2;    // m, tendon slack length (tendon held rigid at this)
    double alpha = 0.0;      // rad, pennation angle
    std::vector<ViaPoint> path;
};

struct ContactPointDesc {
    std::string link;
    Vec3 offset = Vec3::Zero();
    double radius = 0.02;
};

// Normalized Hill curve parameters; overridable per model file.
struct CurveParams {
    double gamma = 0.45;   // active force-length width
    double v_max = 10.0;   // max shortening velocity, l_opt/s
    double n_ecc = 1.5;    // eccentric force plateau
    double k_curv = 0.25;  // concentric curvature
    double k_pe = 4.0;     // passive exponent
    double eps0 = 0.6;     // passive strain at f_max
};

struct ContactParams {
    double k_p = 3e4;   // N/m
    double k_d = 300.0; // N*s/m
    double mu = 0.9;
    double ground_height = 0.0;
};

struct EnergyParams {
    double rho = 1059.7;   // kg/m^3 muscle density
    double sigma = 2.5e5;  // Pa specific tension
    double c_act = 40.0;   // W/kg activation heat
    double c_maint = 74.0; // W/kg maintenance heat
    double c_short = 0.25; // shortening heat coefficient
    double basal = 1.2;    // W/kg whole-body basal rate
};

struct ModelDesc {
    int schema_version = 1;
    std::string name;
    double total_mass = 0.0;
    std::vector<LinkDesc> links;
    std::vector<JointDesc> joints;
    std::vector<MuscleDesc> muscles;
    std::vector<ContactPointDesc> contact_points;
    CurveParams curves;
    ContactParams contact;
    EnergyParams energy;

    int link_index(const std::string& name) const;  // -1 for "world"
    const LinkDesc& link(const std::string& name) const;
};

ModelDesc load_model(const std::string& text);
ModelDesc load_model_file(const std::string& path);
std::string serialize_model(const ModelDesc& m);
void validate_model(const ModelDesc& m);
int dof_count(const ModelDesc& m);

// Resolve a bundled fixture name ("biped2d") or a filesystem path.
std::string resolve_model_path(const std::string& name_or_path);

}  // namespace myo
