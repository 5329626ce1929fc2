#include "myo/model.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace myo {

int joint_dof(JointType t) {
    switch (t) {
        case JointType::Free6: return 6;
        case JointType::Planar3: return 3;
        case JointType::Ball3: return 3;
        case JointType::Revolute1: return 1;
    }
    return 0;
}

const char* joint_type_name(JointType t) {
    switch (t) {
        case JointType::Free6: return "free6";
        case JointType::Planar3: return "planar3";
        case JointType::Ball3: return "ball3";
        case JointType::Revolute1: return "revolute1";
    }
    return "?";
}

static JointType joint_type_from_name(const std::string& s, const std::string& path) {
    if (s == "free6") return JointType::Free6;
    if (s == "planar3") return JointType::Planar3;
    if (s == "ball3") return JointType::Ball3;
    if (s == "revolute1") return JointType::Revolute1;
    throw ValidationError(path + ": unknown joint type '" + s + "'");
}

int ModelDesc::link_index(const std::string& n) const {
    if (n == "world") return -1;
    for (size_t i = 0; i < links.size(); ++i)
        if (links[i].name == n) return static_cast<int>(i);
    throw ValidationError("unknown link '" + n + "'");
}

const LinkDesc& ModelDesc::link(const std::string& n) const {
    return links.at(static_cast<size_t>(link_index(n)));
}

int dof_count(const ModelDesc& m) {
    int n = 0;
    for (const auto& j : m.joints) n += joint_dof(j.type);
    return n;
}

// ---------------------------------------------------------------------------
// JSON helpers

static const json& require(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + "." + key + ": missing");
    return *it;
}

static double num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected number");
    return j.get<double>();
}

static std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path + ": expected string");
    return j.get<std::string>();
}

static Vec3 vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ParseError(path + ": expected [x, y, z]");
    return Vec3(num(j[0], path), num(j[1], path), num(j[2], path));
}

static Mat3 inertia_from_json(const json& j, const std::string& path) {
    Mat3 I = Mat3::Zero();
    if (j.is_number()) {
        // planar shorthand: one scalar used on all principal axes
        I = Mat3::Identity() * j.get<double>();
    } else if (j.is_array() && j.size() == 3 && j[0].is_number()) {
        I(0, 0) = num(j[0], path);
        I(1, 1) = num(j[1], path);
        I(2, 2) = num(j[2], path);
    } else if (j.is_array() && j.size() == 3 && j[0].is_array()) {
        for (int r = 0; r < 3; ++r) {
            if (!j[r].is_array() || j[r].size() != 3) throw ParseError(path + ": expected 3x3");
            for (int c = 0; c < 3; ++c) I(r, c) = num(j[r][c], path);
        }
    } else {
        throw ParseError(path + ": expected scalar, [ixx,iyy,izz] or 3x3 array");
    }
    return I;
}

static json inertia_to_json(const Mat3& I) {
    // emit the compact diagonal form when exact
    Mat3 off = I;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() == 0.0) {
        return json::array({I(0, 0), I(1, 1), I(2, 2)});
    }
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({I(r, 0), I(r, 1), I(r, 2)}));
    return rows;
}

static json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// ---------------------------------------------------------------------------
// Parsing

static GeomDesc parse_geom(const json& j, const std::string& path) {
    GeomDesc g;
    g.type = str(require(j, "type", path), path + ".type");
    if (g.type == "capsule") {
        g.radius = num(require(j, "radius", path), path + ".radius");
        g.length = num(require(j, "length", path), path + ".length");
    } else if (g.type == "box") {
        g.half_extents = vec3(require(j, "half_extents", path), path + ".half_extents");
    } else {
        throw ValidationError(path + ".type: unknown geometry '" + g.type + "'");
    }
    return g;
}

ModelDesc load_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model text is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("top level: expected object");

    const json& ver = require(j, "schema_version", "");
    if (!ver.is_number_integer()) throw ParseError("schema_version: expected integer");
    if (ver.get<int>() != 1)
        throw VersionError("schema_version: unsupported version " + ver.dump() + " (supported: 1)");

    ModelDesc m;
    m.schema_version = 1;
    m.name = str(require(j, "name", ""), "name");
    m.total_mass = num(require(j, "total_mass_kg", ""), "total_mass_kg");

    const json& links = require(j, "links", "");
    if (!links.is_array()) throw ParseError("links: expected array");
    for (size_t i = 0; i < links.size(); ++i) {
        const std::string p = "links[" + std::to_string(i) + "]";
        const json& lj = links[i];
        LinkDesc l;
        l.name = str(require(lj, "name", p), p + ".name");
        l.mass = num(require(lj, "mass", p), p + ".mass");
        l.inertia = inertia_from_json(require(lj, "inertia", p), p + ".inertia");
        if (lj.contains("geometry")) l.geometry = parse_geom(lj["geometry"], p + ".geometry");
        m.links.push_back(std::move(l));
    }

    const json& joints = require(j, "joints", "");
    if (!joints.is_array()) throw ParseError("joints: expected array");
    for (size_t i = 0; i < joints.size(); ++i) {
        const std::string p = "joints[" + std::to_string(i) + "]";
        const json& jj = joints[i];
        JointDesc d;
        d.name = str(require(jj, "name", p), p + ".name");
        d.parent = str(require(jj, "parent", p), p + ".parent");
        d.child = str(require(jj, "child", p), p + ".child");
        d.type = joint_type_from_name(str(require(jj, "type", p), p + ".type"), p + ".type");
        if (jj.contains("axis")) d.axis = vec3(jj["axis"], p + ".axis");
        if (jj.contains("parent_offset")) d.parent_offset = vec3(jj["parent_offset"], p + ".parent_offset");
        if (jj.contains("child_offset")) d.child_offset = vec3(jj["child_offset"], p + ".child_offset");
        if (jj.contains("limits") && !jj["limits"].is_null()) {
            const json& lim = jj["limits"];
            if (!lim.is_array()) throw ParseError(p + ".limits: expected array");
            auto parse_pair = [&](const json& pr, const std::string& pp) {
                if (!pr.is_array() || pr.size() != 2) throw ParseError(pp + ": expected [lo, hi]");
                return std::make_pair(num(pr[0], pp), num(pr[1], pp));
            };
            if (lim.size() == 2 && lim[0].is_number()) {
                d.limits.push_back(parse_pair(lim, p + ".limits"));
            } else {
                for (size_t k = 0; k < lim.size(); ++k)
                    d.limits.push_back(parse_pair(lim[k], p + ".limits[" + std::to_string(k) + "]"));
            }
        }
        m.joints.push_back(std::move(d));
    }

    if (j.contains("muscles")) {
        const json& muscles = j["muscles"];
        if (!muscles.is_array()) throw ParseError("muscles: expected array");
        for (size_t i = 0; i < muscles.size(); ++i) {
            const std::string p = "muscles[" + std::to_string(i) + "]";
            const json& mj = muscles[i];
            MuscleDesc d;
            d.name = str(require(mj, "name", p), p + ".name");
            d.f_max = num(require(mj, "f_max", p), p + ".f_max");
            d.l_opt = num(require(mj, "l_opt", p), p + ".l_opt");
            d.l_slack = num(require(mj, "l_slack", p), p + ".l_slack");
            d.alpha = num(require(mj, "alpha", p), p + ".alpha");
            const json& path = require(mj, "path", p);
            if (!path.is_array()) throw ParseError(p + ".path: expected array");
            for (size_t k = 0; k < path.size(); ++k) {
                const std::string pp = p + ".path[" + std::to_string(k) + "]";
                ViaPoint v;
                v.link = str(require(path[k], "link", pp), pp + ".link");
                v.offset = vec3(require(path[k], "offset", pp), pp + ".offset");
                d.path.push_back(std::move(v));
            }
            m.muscles.push_back(std::move(d));
        }
    }

    if (j.contains("contact_points")) {
        const json& cps = j["contact_points"];
        if (!cps.is_array()) throw ParseError("contact_points: expected array");
        for (size_t i = 0; i < cps.size(); ++i) {
            const std::string p = "contact_points[" + std::to_string(i) + "]";
            ContactPointDesc c;
            c.link = str(require(cps[i], "link", p), p + ".link");
            c.offset = vec3(require(cps[i], "offset", p), p + ".offset");
            if (cps[i].contains("radius")) c.radius = num(cps[i]["radius"], p + ".radius");
            m.contact_points.push_back(std::move(c));
        }
    }

    auto opt = [&](const char* key, auto&& fn) {
        if (j.contains(key)) fn(j[key], std::string(key));
    };
    opt("curves", [&](const json& c, const std::string& p) {
        if (c.contains("gamma")) m.curves.gamma = num(c["gamma"], p + ".gamma");
        if (c.contains("v_max")) m.curves.v_max = num(c["v_max"], p + ".v_max");
        if (c.contains("n_ecc")) m.curves.n_ecc = num(c["n_ecc"], p + ".n_ecc");
        if (c.contains("k_curv")) m.curves.k_curv = num(c["k_curv"], p + ".k_curv");
        if (c.contains("k_pe")) m.curves.k_pe = num(c["k_pe"], p + ".k_pe");
        if (c.contains("eps0")) m.curves.eps0 = num(c["eps0"], p + ".eps0");
    });
    opt("contact", [&](const json& c, const std::string& p) {
        if (c.contains("k_p")) m.contact.k_p = num(c["k_p"], p + ".k_p");
        if (c.contains("k_d")) m.contact.k_d = num(c["k_d"], p + ".k_d");
        if (c.contains("mu")) m.contact.mu = num(c["mu"], p + ".mu");
        if (c.contains("ground_height")) m.contact.ground_height = num(c["ground_height"], p + ".ground_height");
    });
    opt("energy", [&](const json& c, const std::string& p) {
        if (c.contains("rho")) m.energy.rho = num(c["rho"], p + ".rho");
        if (c.contains("sigma")) m.energy.sigma = num(c["sigma"], p + ".sigma");
        if (c.contains("c_act")) m.energy.c_act = num(c["c_act"], p + ".c_act");
        if (c.contains("c_maint")) m.energy.c_maint = num(c["c_maint"], p + ".c_maint");
        if (c.contains("c_short")) m.energy.c_short = num(c["c_short"], p + ".c_short");
        if (c.contains("basal")) m.energy.basal = num(c["basal"], p + ".basal");
    });

    validate_model(m);
    return m;
}

ModelDesc load_model_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ModelError("cannot open model file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return load_model(ss.str());
}

// ---------------------------------------------------------------------------
// Validation

void validate_model(const ModelDesc& m) {
    std::set<std::string> names;
    for (size_t i = 0; i < m.links.size(); ++i) {
        const std::string p = "links[" + std::to_string(i) + "]";
        const LinkDesc& l = m.links[i];
        if (l.name.empty() || l.name == "world")
            throw ValidationError(p + ".name: invalid link name '" + l.name + "'");
        if (!names.insert(l.name).second)
            throw ValidationError(p + ".name: duplicate name '" + l.name + "'");
        if (!(l.mass > 0)) throw ValidationError(p + ".mass: must be > 0");
        if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ValidationError(p + ".inertia: not symmetric");
        Eigen::LLT<Mat3> llt(l.inertia);
        if (llt.info() != Eigen::Success)
            throw ValidationError(p + ".inertia: not positive definite");
    }
    for (size_t i = 0; i < m.joints.size(); ++i) {
        const std::string p = "joints[" + std::to_string(i) + "]";
        if (!names.insert(m.joints[i].name).second)
            throw ValidationError(p + ".name: duplicate name '" + m.joints[i].name + "'");
    }
    for (size_t i = 0; i < m.muscles.size(); ++i) {
        const std::string p = "muscles[" + std::to_string(i) + "]";
        if (!names.insert(m.muscles[i].name).second)
            throw ValidationError(p + ".name: duplicate name '" + m.muscles[i].name + "'");
    }

    // joint graph: rooted tree, every non-root link has exactly one parent joint
    std::map<std::string, int> link_parent_count;
    for (const auto& l : m.links) link_parent_count[l.name] = 0;
    int root_joints = 0;
    for (size_t i = 0; i < m.joints.size(); ++i) {
        const std::string p = "joints[" + std::to_string(i) + "]";
        const JointDesc& jd = m.joints[i];
        if (jd.parent != "world" && !link_parent_count.count(jd.parent))
            throw ValidationError(p + ".parent: unknown link '" + jd.parent + "'");
        if (!link_parent_count.count(jd.child))
            throw ValidationError(p + ".child: unknown link '" + jd.child + "'");
        if (jd.parent == "world") ++root_joints;
        ++link_parent_count[jd.child];

        const bool is_root = jd.parent == "world";
        if ((jd.type == JointType::Free6 || jd.type == JointType::Planar3) && !is_root)
            throw ValidationError(p + ".type: " + std::string(joint_type_name(jd.type)) +
                                  " allowed only at the root");
        if ((jd.type == JointType::Free6 || jd.type == JointType::Planar3) &&
            jd.child_offset.norm() != 0.0)
            throw ValidationError(p + ".child_offset: must be zero for " +
                                  std::string(joint_type_name(jd.type)));
        if (jd.type == JointType::Revolute1 && std::abs(jd.axis.norm() - 1.0) > 1e-9)
            throw ValidationError(p + ".axis: not unit-norm");
        const int dof = joint_dof(jd.type);
        if (!jd.limits.empty() && static_cast<int>(jd.limits.size()) != dof)
            throw ValidationError(p + ".limits: expected " + std::to_string(dof) + " ranges");
        for (size_t k = 0; k < jd.limits.size(); ++k)
            if (jd.limits[k].first > jd.limits[k].second)
                throw ValidationError(p + ".limits[" + std::to_string(k) + "]: lo > hi");
    }
    if (root_joints != 1)
        throw ValidationError("joints: expected exactly one root joint (parent \"world\"), found " +
                              std::to_string(root_joints));
    for (const auto& [link, cnt] : link_parent_count)
        if (cnt != 1)
            throw ValidationError("links: link '" + link + "' has " + std::to_string(cnt) +
                                  " parent joints, expected 1");

    // reachability from root (rules out cycles among joints)
    {
        std::set<std::string> reached = {"world"};
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& jd : m.joints) {
                if (reached.count(jd.parent) && !reached.count(jd.child)) {
                    reached.insert(jd.child);
                    grew = true;
                }
            }
        }
        for (const auto& l : m.links)
            if (!reached.count(l.name))
                throw ValidationError("links: link '" + l.name + "' not reachable from the root");
    }

    double mass_sum = 0.0;
    for (const auto& l : m.links) mass_sum += l.mass;
    if (std::abs(mass_sum - m.total_mass) > 1e-6 * std::max(1.0, std::abs(m.total_mass)))
        throw ValidationError("total_mass_kg: link masses sum to " + std::to_string(mass_sum) +
                              ", expected " + std::to_string(m.total_mass));

    for (size_t i = 0; i < m.muscles.size(); ++i) {
        const std::string p = "muscles[" + std::to_string(i) + "]";
        const MuscleDesc& d = m.muscles[i];
        if (!(d.f_max > 0)) throw ValidationError(p + ".f_max: must be > 0");
        if (!(d.l_opt > 0)) throw ValidationError(p + ".l_opt: must be > 0");
        if (!(d.l_slack >= 0)) throw ValidationError(p + ".l_slack: must be >= 0");
        if (!(d.alpha >= 0 && d.alpha < M_PI / 2))
            throw ValidationError(p + ".alpha: must be in [0, pi/2)");
        if (d.path.size() < 2)
            throw ValidationError(p + ".path: needs at least 2 via-points");
        std::set<std::string> path_links;
        for (size_t k = 0; k < d.path.size(); ++k) {
            const std::string pp = p + ".path[" + std::to_string(k) + "].link";
            if (d.path[k].link != "world" && !link_parent_count.count(d.path[k].link))
                throw ValidationError(pp + ": unknown link '" + d.path[k].link + "'");
            path_links.insert(d.path[k].link);
        }
        if (path_links.size() < 2)
            throw ValidationError(p + ".path: via-points must span at least 2 distinct links");
    }

    for (size_t i = 0; i < m.contact_points.size(); ++i) {
        const std::string p = "contact_points[" + std::to_string(i) + "]";
        if (!link_parent_count.count(m.contact_points[i].link))
            throw ValidationError(p + ".link: unknown link '" + m.contact_points[i].link + "'");
        if (!(m.contact_points[i].radius > 0))
            throw ValidationError(p + ".radius: must be > 0");
    }

    if (!(m.curves.gamma > 0) || !(m.curves.v_max > 0) || !(m.curves.k_curv > 0) ||
        !(m.curves.k_pe > 0) || !(m.curves.eps0 > 0))
        throw ValidationError("curves: all parameters must be > 0");
    if (!(m.curves.n_ecc > 1)) throw ValidationError("curves.n_ecc: must be > 1");
    if (!(m.contact.k_p > 0) || !(m.contact.k_d > 0))
        throw ValidationError("contact: k_p and k_d must be > 0");
    if (!(m.contact.mu >= 0)) throw ValidationError("contact.mu: must be >= 0");
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_model(const ModelDesc& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["name"] = m.name;
    j["total_mass_kg"] = m.total_mass;

    json links = json::array();
    for (const auto& l : m.links) {
        json lj;
        lj["name"] = l.name;
        lj["mass"] = l.mass;
        lj["inertia"] = inertia_to_json(l.inertia);
        json g;
        g["type"] = l.geometry.type;
        if (l.geometry.type == "capsule") {
            g["radius"] = l.geometry.radius;
            g["length"] = l.geometry.length;
        } else {
            g["half_extents"] = vec3_to_json(l.geometry.half_extents);
        }
        lj["geometry"] = g;
        links.push_back(lj);
    }
    j["links"] = links;

    json joints = json::array();
    for (const auto& d : m.joints) {
        json jj;
        jj["name"] = d.name;
        jj["parent"] = d.parent;
        jj["child"] = d.child;
        jj["type"] = joint_type_name(d.type);
        if (d.type == JointType::Revolute1) jj["axis"] = vec3_to_json(d.axis);
        jj["parent_offset"] = vec3_to_json(d.parent_offset);
        jj["child_offset"] = vec3_to_json(d.child_offset);
        if (!d.limits.empty()) {
            json lim = json::array();
            for (const auto& [lo, hi] : d.limits) lim.push_back(json::array({lo, hi}));
            jj["limits"] = lim;
        }
        joints.push_back(jj);
    }
    j["joints"] = joints;

    json muscles = json::array();
    for (const auto& d : m.muscles) {
        json mj;
        mj["name"] = d.name;
        mj["f_max"] = d.f_max;
        mj["l_opt"] = d.l_opt;
        mj["l_slack"] = d.l_slack;
        mj["alpha"] = d.alpha;
        json path = json::array();
        for (const auto& v : d.path) {
            json vj;
            vj["link"] = v.link;
            vj["offset"] = vec3_to_json(v.offset);
            path.push_back(vj);
        }
        mj["path"] = path;
        muscles.push_back(mj);
    }
    j["muscles"] = muscles;

    json cps = json::array();
    for (const auto& c : m.contact_points) {
        json cj;
        cj["link"] = c.link;
        cj["offset"] = vec3_to_json(c.offset);
        cj["radius"] = c.radius;
        cps.push_back(cj);
    }
    j["contact_points"] = cps;

    j["curves"] = {{"gamma", m.curves.gamma}, {"v_max", m.curves.v_max},
                   {"n_ecc", m.curves.n_ecc}, {"k_curv", m.curves.k_curv},
                   {"k_pe", m.curves.k_pe},   {"eps0", m.curves.eps0}};
    j["contact"] = {{"k_p", m.contact.k_p}, {"k_d", m.contact.k_d},
                    {"mu", m.contact.mu},   {"ground_height", m.contact.ground_height}};
    j["energy"] = {{"rho", m.energy.rho},       {"sigma", m.energy.sigma},
                   {"c_act", m.energy.c_act},   {"c_maint", m.energy.c_maint},
                   {"c_short", m.energy.c_short}, {"basal", m.energy.basal}};

    return j.dump(2) + "\n";
}

std::string resolve_model_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path)) return name_or_path;
    std::vector<std::string> roots;
    if (const char* env = std::getenv("MYOWALK_DATA")) roots.push_back(env);
    roots.push_back("data/models");
#ifdef MYO_DATA_DIR
    roots.push_back(std::string(MYO_DATA_DIR) + "/models");
#endif
    for (const auto& r : roots) {
        fs::path p = fs::path(r) / (name_or_path + ".json");
        if (fs::exists(p)) return p.string();
        p = fs::path(r) / name_or_path;
        if (fs::exists(p)) return p.string();
    }
    throw ModelError("model not found: '" + name_or_path + "' (not a file, not a bundled model)");
}

}  // namespace myo
