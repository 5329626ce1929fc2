#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace myo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
        -v.y(), v.x(), 0;
    return m;
}

// Rotation vector (axis * angle) to rotation matrix.
inline Mat3 exp_rotvec(const Vec3& r) {
    double angle = r.norm();
    if (angle < 1e-12) {
        return Mat3::Identity() + skew(r);
    }
    return Eigen::AngleAxisd(angle, r / angle).toRotationMatrix();
}

inline Vec3 log_rotation(const Mat3& R) {
    Eigen::AngleAxisd aa(R);
    return aa.angle() * aa.axis();
}

// Spatial motion transform child<-parent.
// E rotates parent coords into child coords; r is the child frame origin
// expressed in parent coords. Motion vectors are [angular; linear].
struct Xform {
    Mat3 E = Mat3::Identity();
    Vec3 r = Vec3::Zero();

    Vec6 apply_motion(const Vec6& m) const {
        Vec6 out;
        const Vec3 w = m.head<3>();
        const Vec3 v = m.tail<3>();
        out.head<3>() = E * w;
        out.tail<3>() = E * (v + w.cross(r));
        return out;
    }

    // f expressed in child coords -> parent coords (X^T f).
    Vec6 apply_force_transpose(const Vec6& f) const {
        Vec6 out;
        const Vec3 n = f.head<3>();
        const Vec3 fl = f.tail<3>();
        const Vec3 f_p = E.transpose() * fl;
        out.tail<3>() = f_p;
        out.head<3>() = E.transpose() * n + r.cross(f_p);
        return out;
    }

    Mat6 as_matrix() const {
        Mat6 X = Mat6::Zero();
        X.topLeftCorner<3, 3>() = E;
        X.bottomRightCorner<3, 3>() = E;
        X.bottomLeftCorner<3, 3>() = -E * skew(r);
        return X;
    }
};

// v x m for motion vectors.
inline Vec6 cross_motion(const Vec6& a, const Vec6& b) {
    Vec6 out;
    const Vec3 aw = a.head<3>(), av = a.tail<3>();
    const Vec3 bw = b.head<3>(), bv = b.tail<3>();
    out.head<3>() = aw.cross(bw);
    out.tail<3>() = aw.cross(bv) + av.cross(bw);
    return out;
}

// v x* f for force vectors.
inline Vec6 cross_force(const Vec6& a, const Vec6& f) {
    Vec6 out;
    const Vec3 aw = a.head<3>(), av = a.tail<3>();
    const Vec3 n = f.head<3>(), fl = f.tail<3>();
    out.head<3>() = aw.cross(n) + av.cross(fl);
    out.tail<3>() = aw.cross(fl);
    return out;
}

inline double clampd(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace myo
