#include "cpbo/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cpbo/rng.hpp"
#include "json.hpp"

namespace cpbo {

const std::vector<std::string> kGraspDirs = {"front", "right", "top", "back", "left"};

namespace {

constexpr double kTwoPi = 6.283185307179586;

int dir_index(const std::string& dir) {
    for (size_t i = 0; i < kGraspDirs.size(); ++i)
        if (kGraspDirs[i] == dir) return static_cast<int>(i);
    return -1;
}

/// Axis-aligned cover of a (possibly yawed) body box.
Aabb body_cover(const Box& b, const WorldPose& p) {
    if (p.yaw == 0.0) return Aabb::from_center(p.center, b.half);
    const double c = std::abs(std::cos(p.yaw)), s = std::abs(std::sin(p.yaw));
    return Aabb::from_center(p.center,
                             {c * b.half.x + s * b.half.y, s * b.half.x + c * b.half.y, b.half.z});
}

OrientedRect footprint(const Box& b, const WorldPose& p) {
    return {p.center.x, p.center.y, b.half.x, b.half.y, p.yaw};
}

/// The gripper approach volume: a box extruded from the grasped face along
/// `dir` by the approach depth, padded transversally by the clearance. Yawed
/// bodies use their axis-aligned cover (conservative).
Aabb grasp_volume(const Box& body, const WorldPose& pose, const std::string& dir,
                  const Gripper& g) {
    const Aabb bb = body_cover(body, pose);
    const double cl = g.clearance, depth = g.approach_depth;
    Aabb v = bb;
    if (dir == "top") {
        v.lo.z = bb.hi.z;
        v.hi.z = bb.hi.z + depth;
        v.lo.x -= cl;
        v.hi.x += cl;
        v.lo.y -= cl;
        v.hi.y += cl;
    } else if (dir == "front") {
        v.hi.x = bb.lo.x;
        v.lo.x = bb.lo.x - depth;
        v.lo.y -= cl;
        v.hi.y += cl;
        v.hi.z += cl;
    } else if (dir == "back") {
        v.lo.x = bb.hi.x;
        v.hi.x = bb.hi.x + depth;
        v.lo.y -= cl;
        v.hi.y += cl;
        v.hi.z += cl;
    } else if (dir == "left") {
        v.hi.y = bb.lo.y;
        v.lo.y = bb.lo.y - depth;
        v.lo.x -= cl;
        v.hi.x += cl;
        v.hi.z += cl;
    } else if (dir == "right") {
        v.lo.y = bb.hi.y;
        v.hi.y = bb.hi.y + depth;
        v.lo.x -= cl;
        v.hi.x += cl;
        v.hi.z += cl;
    } else {
        throw std::invalid_argument("unknown grasp direction '" + dir + "'");
    }
    return v;
}

std::string mm(double meters) { return std::to_string(std::llround(meters * 1000.0)); }

}  // namespace

const Box* WorldState::find_body(const std::string& name) const {
    for (const Box& b : bodies)
        if (b.name == name) return &b;
    return nullptr;
}

const Box* WorldState::find_obstacle(const std::string& name) const {
    for (const Box& b : obstacles)
        if (b.name == name) return &b;
    return nullptr;
}

const Region* WorldState::find_region(const std::string& name) const {
    for (const Region& r : regions)
        if (r.name == name) return &r;
    return nullptr;
}

std::string object_class(const Box& box) {
    return box.tag + ":" + mm(box.half.x * 2) + "x" + mm(box.half.y * 2) + "x" + mm(box.half.z * 2);
}

std::string region_class(const Region& region) {
    return "region:" + mm(region.hx * 2) + "x" + mm(region.hy * 2);
}

WorldPose world_pose_on_region(const WorldState& w, const std::string& body,
                               const std::string& region, const Pose& p) {
    const Region* r = w.find_region(region);
    if (!r) throw std::invalid_argument("unknown region '" + region + "'");
    const Box* b = w.find_body(body);
    if (!b) throw std::invalid_argument("unknown body '" + body + "'");
    WorldPose out;
    out.center = {r->cx + (2.0 * p.u - 1.0) * r->hx, r->cy + (2.0 * p.v - 1.0) * r->hy,
                  r->z + b->half.z};
    out.yaw = w.yaw_poses ? p.w * kTwoPi : 0.0;
    return out;
}

ConstraintResult check_grasp(const WorldState& w, const std::string& body, const WorldPose& pose,
                             const std::string& dir, CheckDetail* detail) {
    const Box* b = w.find_body(body);
    if (!b) throw std::invalid_argument("check_grasp: unknown body '" + body + "'");
    if (dir_index(dir) < 0) throw std::invalid_argument("check_grasp: unknown direction '" + dir + "'");

    const Aabb volume = grasp_volume(*b, pose, dir, w.gripper);
    ConstraintResult res;
    CheckDetail det;
    det.reach_ok = w.robot_reach.contains(volume);

    for (const Box& obs : w.obstacles)
        if (volume.overlaps(Aabb::from_center(obs.center, obs.half)))
            res.colliding_obstacles.push_back(obs.name);
    for (const Box& other : w.bodies) {
        if (other.name == body) continue;
        auto it = w.body_poses.find(other.name);
        if (it == w.body_poses.end()) continue;  // held, not resting
        if (volume.overlaps(body_cover(other, it->second))) res.colliding_obstacles.push_back(other.name);
    }

    if (!det.reach_ok || !res.colliding_obstacles.empty()) res.mark_failed("Inv-kin");
    if (detail) *detail = det;
    return res;
}

ConstraintResult check_place(const WorldState& w, const std::string& body, const Pose& target,
                             const std::string& region, CheckDetail* detail) {
    const Region* r = w.find_region(region);
    if (!r) throw std::invalid_argument("check_place: unknown region '" + region + "'");
    const Box* b = w.find_body(body);
    if (!b) throw std::invalid_argument("check_place: unknown body '" + body + "'");

    const WorldPose wp = world_pose_on_region(w, body, region, target);
    const OrientedRect fp = footprint(*b, wp);
    const double z_lo = r->z, z_hi = r->z + 2.0 * b->half.z;

    ConstraintResult res;
    CheckDetail det;
    det.containment_ok = rect_inside_aligned(fp, r->cx - r->hx, r->cy - r->hy, r->cx + r->hx, r->cy + r->hy);

    for (const Box& obs : w.obstacles) {
        if (obs.center.z - obs.half.z >= z_hi || obs.center.z + obs.half.z <= z_lo) continue;
        const OrientedRect ofp{obs.center.x, obs.center.y, obs.half.x, obs.half.y, 0.0};
        if (rects_overlap(fp, ofp)) res.colliding_obstacles.push_back(obs.name);
    }
    for (const Box& other : w.bodies) {
        if (other.name == body) continue;
        auto it = w.body_poses.find(other.name);
        if (it == w.body_poses.end()) continue;
        const WorldPose& op = it->second;
        if (op.center.z - other.half.z >= z_hi || op.center.z + other.half.z <= z_lo) continue;
        if (rects_overlap(fp, footprint(other, op))) res.colliding_obstacles.push_back(other.name);
    }

    if (!det.containment_ok || !res.colliding_obstacles.empty()) res.mark_failed("Move-Place");
    if (detail) *detail = det;
    return res;
}

ConstraintResult check_motion(const WorldState& w, const std::string& body, const WorldPose& from,
                              const WorldPose& to, const std::string& dir, CheckDetail* detail) {
    const Box* b = w.find_body(body);
    if (!b) throw std::invalid_argument("check_motion: unknown body '" + body + "'");
    if (detail) *detail = CheckDetail{};

    ConstraintResult res;
    const Vec3 d = to.center - from.center;
    if (std::abs(d.x) < 1e-12 && std::abs(d.y) < 1e-12 && std::abs(d.z) < 1e-12 &&
        from.yaw == to.yaw)
        return res;  // empty sweep

    // Moving parts: the body box plus the gripper approach volume, both as
    // axis-aligned covers rigidly attached to the body center. The yaw cover
    // merges both endpoint orientations (conservative for yawed carries).
    const Aabb cover_from = body_cover(*b, from);
    const Aabb cover_to = body_cover(*b, {from.center, to.yaw});
    const Aabb body_box = cover_from.merged(cover_to);
    const Aabb grip_box = grasp_volume(*b, from, dir, w.gripper);

    struct Part {
        Vec3 offset;
        Vec3 half;
    };
    const Part parts[2] = {
        {body_box.center() - from.center, body_box.half()},
        {grip_box.center() - from.center, grip_box.half()},
    };

    // Three-segment transfer: lift to the clearance height, translate, lower.
    const double travel_z = w.lift_height + b->half.z;
    const Vec3 p0 = from.center;
    const Vec3 p1{from.center.x, from.center.y, travel_z};
    const Vec3 p2{to.center.x, to.center.y, travel_z};
    const Vec3 p3 = to.center;
    const Vec3 segs[3][2] = {{p0, p1}, {p1, p2}, {p2, p3}};

    auto sweep_hits = [&](const Aabb& obstacle) {
        for (const auto& seg : segs)
            for (const Part& part : parts)
                if (swept_box_hits(seg[0] + part.offset, seg[1] + part.offset, part.half, obstacle))
                    return true;
        return false;
    };

    for (const Box& obs : w.obstacles)
        if (sweep_hits(Aabb::from_center(obs.center, obs.half)))
            res.colliding_obstacles.push_back(obs.name);
    for (const Box& other : w.bodies) {
        if (other.name == body) continue;
        auto it = w.body_poses.find(other.name);
        if (it == w.body_poses.end()) continue;
        if (sweep_hits(body_cover(other, it->second))) res.colliding_obstacles.push_back(other.name);
    }

    if (!res.colliding_obstacles.empty()) res.mark_failed("Plan-motion");
    return res;
}

// ---------------------------------------------------------------------------
// Task loading
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

Vec3 vec3_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

const char* kTaskIds[] = {"desk", "deskP", "regrasp", "pack", "packP1", "packP2", "packP3"};

std::string task_dir() {
    if (const char* env = std::getenv("CPBO_TASK_DIR")) return env;
#ifdef CPBO_TASK_DIR
    return CPBO_TASK_DIR;
#else
    return "tasks";
#endif
}

}  // namespace

Task load_task_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open task file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed task file " + path + ": " + e.what());
    }
    if (j.value("version", 0) != 1)
        throw std::runtime_error("task file " + path + ": unsupported version");

    Task task;
    task.id = j.at("id").get<std::string>();
    WorldState& w = task.world;
    w.lift_height = j.at("lift_height").get<double>();
    w.yaw_poses = j.value("yaw_poses", false);
    w.gripper.approach_depth = j.at("gripper").at("approach_depth").get<double>();
    w.gripper.clearance = j.at("gripper").at("clearance").get<double>();
    w.robot_reach = {vec3_of(j.at("robot_reach").at("lo")), vec3_of(j.at("robot_reach").at("hi"))};
    task.noise_prob = j.value("noise_prob", 0.0);

    std::set<std::string> constants;
    for (const std::string& d : kGraspDirs) {
        constants.insert(d);
        task.constant_types[d] = "grasp-dir";
    }
    constants.insert("config0");
    task.constant_types["config0"] = "config";

    for (const auto& rj : j.at("regions")) {
        Region r;
        r.name = rj.at("name").get<std::string>();
        r.cx = rj.at("center").at(0).get<double>();
        r.cy = rj.at("center").at(1).get<double>();
        r.hx = rj.at("half").at(0).get<double>();
        r.hy = rj.at("half").at(1).get<double>();
        r.z = rj.value("surface_z", 0.0);
        w.regions.push_back(r);
        constants.insert(r.name);
        task.constant_types[r.name] = "region";
    }

    for (const auto& oj : j.at("obstacles")) {
        Box b;
        b.name = oj.at("name").get<std::string>();
        b.tag = oj.value("tag", "obstacle");
        b.center = vec3_of(oj.at("center"));
        b.half = vec3_of(oj.at("half"));
        if (b.half.x <= 0 || b.half.y <= 0 || b.half.z <= 0)
            throw std::runtime_error("task file: obstacle '" + b.name + "' needs positive half extents");
        w.obstacles.push_back(b);
    }

    for (const auto& bj : j.at("bodies")) {
        Box b;
        b.name = bj.at("name").get<std::string>();
        b.tag = "body";
        b.half = vec3_of(bj.at("half"));
        if (b.half.x <= 0 || b.half.y <= 0 || b.half.z <= 0)
            throw std::runtime_error("task file: body '" + b.name + "' needs positive half extents");
        w.bodies.push_back(b);
        constants.insert(b.name);
        task.constant_types[b.name] = "body";

        const std::string region = bj.at("region").get<std::string>();
        Pose p{bj.at("pose").at(0).get<double>(), bj.at("pose").at(1).get<double>(),
               bj.at("pose").size() > 2 ? bj.at("pose").at(2).get<double>() : 0.0};
        w.body_poses[b.name] = world_pose_on_region(w, b.name, region, p);
        task.initial_placement[b.name] = {region, p};

        if (bj.contains("initial_pose_name")) {
            const std::string pn = bj.at("initial_pose_name").get<std::string>();
            constants.insert(pn);
            task.constant_types[pn] = "fixed-pose";
            task.fixed_pose_body[pn] = b.name;
        }
    }

    std::vector<DecisionVar> vars;
    for (const auto& vj : j.at("decision_vars")) {
        DecisionVar v;
        v.name = vj.at("name").get<std::string>();
        v.type_tag = vj.at("type_tag").get<std::string>();
        const std::string kind = vj.at("kind").get<std::string>();
        if (kind == "discrete") {
            v.kind = VarKind::discrete;
            for (const auto& s : vj.at("domain")) v.discrete_domain.push_back(s.get<std::string>());
        } else if (kind == "continuous") {
            v.kind = VarKind::continuous;
            v.continuous_dim = vj.at("dim").get<int>();
        } else {
            throw std::runtime_error("task file: bad variable kind '" + kind + "'");
        }
        vars.push_back(v);
    }

    std::vector<Operator> ops;
    for (const auto& oj : j.at("operators")) {
        Operator op;
        op.name = oj.at("name").get<std::string>();
        for (const auto& s : oj.at("inputs")) op.inputs.push_back(s.get<std::string>());
        if (oj.contains("outputs"))
            for (const auto& s : oj.at("outputs")) op.outputs.push_back(s.get<std::string>());
        op.layer = oj.at("layer").get<std::string>() == "decision" ? Layer::decision : Layer::transition;
        ops.push_back(op);
    }

    task.skeleton = Skeleton(std::move(ops), std::move(vars), constants);

    // Target region of each pose variable, read off its Sample-pose operator.
    task.pose_var_region.assign(task.skeleton.decision_vars().size(), "");
    for (size_t vi = 0; vi < task.skeleton.decision_vars().size(); ++vi) {
        const Operator& producer = task.skeleton.op(task.skeleton.producer_of_var(static_cast<int>(vi)));
        for (const std::string& in : producer.inputs) {
            auto it = task.constant_types.find(in);
            if (it != task.constant_types.end() && it->second == "region") {
                task.pose_var_region[vi] = in;
                break;
            }
        }
        if (!task.skeleton.decision_vars()[vi].is_discrete() && task.pose_var_region[vi].empty())
            throw std::runtime_error("task file: pose variable '" +
                                     task.skeleton.decision_vars()[vi].name + "' has no target region");
    }
    return task;
}

Task build_task(const std::string& task_id) {
    if (std::find(std::begin(kTaskIds), std::end(kTaskIds), task_id) == std::end(kTaskIds))
        throw std::invalid_argument("unknown task id '" + task_id + "'");
    return load_task_file(task_dir() + "/" + task_id + ".json");
}

std::vector<std::string> predecessor_tasks(const std::string& task_id) {
    if (task_id == "desk") return {"deskP"};
    if (task_id == "regrasp") return {"deskP", "desk"};
    if (task_id == "pack") return {"packP1", "packP2", "packP3"};
    return {};
}

// ---------------------------------------------------------------------------
// Evaluation session
// ---------------------------------------------------------------------------

EvalSession::EvalSession(const Task& task, uint64_t noise_seed)
    : task_(&task), world_(task.world) {
    if (task.noise_prob > 0.0) noise_state_ = splitmix64(noise_seed ^ 0xc0ffee1234ULL) | 1;
}

bool EvalSession::inject_failure() {
    if (task_->noise_prob <= 0.0 || noise_state_ == 0) return false;
    noise_state_ = splitmix64(noise_state_);
    const double u = static_cast<double>(noise_state_ >> 11) * 0x1.0p-53;
    return u < task_->noise_prob;
}

EvalSession::ResolvedConfig EvalSession::resolve_pose_ref(const std::string& ref,
                                                          const std::string& body) const {
    ResolvedConfig cfg;
    cfg.body = body;
    auto fp = task_->fixed_pose_body.find(ref);
    if (fp != task_->fixed_pose_body.end()) {
        const auto& placement = task_->initial_placement.at(fp->second);
        cfg.region = placement.first;
        cfg.region_pose = placement.second;
        cfg.pose = task_->world.body_poses.at(fp->second);  // initial, not current
        cfg.pose_var = -1;
        return cfg;
    }
    const int vi = task_->skeleton.var_index(ref);
    if (vi < 0 || vi >= bound_)
        throw std::logic_error("unresolved pose reference '" + ref + "'");
    const Binding& b = values_[static_cast<size_t>(vi)];
    cfg.region = task_->pose_var_region[static_cast<size_t>(vi)];
    cfg.region_pose = Pose{b.point.at(0), b.point.size() > 1 ? b.point[1] : 0.5,
                           b.point.size() > 2 ? b.point[2] : 0.0};
    cfg.pose = world_pose_on_region(world_, body, cfg.region, cfg.region_pose);
    cfg.pose_var = vi;
    return cfg;
}

std::string EvalSession::resolve_dir_ref(const std::string& ref) const {
    auto ct = task_->constant_types.find(ref);
    if (ct != task_->constant_types.end() && ct->second == "grasp-dir") return ref;
    const int vi = task_->skeleton.var_index(ref);
    if (vi < 0 || vi >= bound_) throw std::logic_error("unresolved direction reference '" + ref + "'");
    const Binding& b = values_[static_cast<size_t>(vi)];
    return task_->skeleton.decision_vars()[static_cast<size_t>(vi)]
        .discrete_domain[static_cast<size_t>(b.symbol)];
}

FailureTrace EvalSession::build_trace(int occ, const std::vector<ObjectHit>& hits) const {
    const Skeleton& sk = task_->skeleton;
    FailureTrace trace;
    trace.op_occ = occ;
    trace.failure_op = sk.op(occ).name;

    std::set<int> resp(sk.chain_decision_vars(occ).begin(), sk.chain_decision_vars(occ).end());
    for (const auto& h : hits)
        if (h.pose_decision >= 0) resp.insert(h.pose_decision);
    for (int vi : resp) trace.responsible_decisions.push_back(sk.decision_vars()[static_cast<size_t>(vi)].name);

    for (const auto& h : hits) trace.context_objects.emplace_back(h.name, h.class_tag);
    for (const std::string& c : sk.chain_constants(occ)) {
        auto it = task_->constant_types.find(c);
        if (it != task_->constant_types.end() && it->second == "fixed-pose")
            trace.context_objects.emplace_back(c, "fixed-pose");
    }
    for (int conn : sk.chain_connections(occ)) trace.connection_ops.push_back(sk.op(conn).name);
    return trace;
}

CheckEvent EvalSession::run_check(int occ, ConstraintResult res, const CheckDetail& detail) {
    CheckEvent ev;
    ev.op_occ = occ;
    ev.detail = detail;
    res.failure_op = res.satisfied ? "" : task_->skeleton.op(occ).name;
    for (const std::string& name : res.colliding_obstacles) {
        ObjectHit hit;
        hit.name = name;
        if (const Box* obs = world_.find_obstacle(name)) {
            hit.class_tag = object_class(*obs);
        } else if (const Box* b = world_.find_body(name)) {
            hit.class_tag = object_class(*b);
            auto placed = placed_by_var_.find(name);
            if (placed != placed_by_var_.end() && placed->second >= 0)
                hit.pose_decision = placed->second;
            else
                hit.at_fixed_pose = true;
        }
        ev.hits.push_back(hit);
    }
    ev.result = std::move(res);
    return ev;
}

void EvalSession::run_transition_ops(Step& step) {
    const Skeleton& sk = task_->skeleton;
    while (next_op_ < sk.op_count() && sk.op(next_op_).layer == Layer::transition) {
        const int occ = next_op_;
        const Operator& op = sk.op(occ);
        ConstraintResult res;
        CheckDetail detail;
        bool checked = false;
        std::string check_region;  // region the check is located at

        if (op.name == "Inv-kin") {
            std::string body, pose_ref, dir_ref;
            for (const std::string& in : op.inputs) {
                auto ct = task_->constant_types.find(in);
                const std::string type = ct != task_->constant_types.end() ? ct->second : "";
                if (type == "body")
                    body = in;
                else if (type == "fixed-pose")
                    pose_ref = in;
                else if (type == "grasp-dir")
                    dir_ref = in;
                else {
                    const int vi = sk.var_index(in);
                    if (vi >= 0)
                        (sk.decision_vars()[static_cast<size_t>(vi)].is_discrete() ? dir_ref : pose_ref) = in;
                }
            }
            ResolvedConfig cfg = resolve_pose_ref(pose_ref, body);
            cfg.dir = resolve_dir_ref(dir_ref);
            res = check_grasp(world_, body, cfg.pose, cfg.dir, &detail);
            checked = true;
            check_region = cfg.region;
            products_[op.outputs.at(0)] = cfg;
        } else if (op.name == "Plan-motion") {
            const std::string& src = op.inputs.at(0);
            const std::string& dst = op.inputs.at(1);
            const ResolvedConfig& to = products_.at(dst);
            if (src != "config0" && !held_body_.empty()) {
                const ResolvedConfig& from = products_.at(src);
                res = check_motion(world_, held_body_, from.pose, to.pose, held_dir_, &detail);
                checked = true;
                check_region = to.region;
            }
            if (!op.outputs.empty()) products_[op.outputs[0]] = to;
        } else if (op.name == "Move-Pick") {
            const ResolvedConfig& cfg = products_.at(op.inputs.at(1));
            held_body_ = op.inputs.at(0);
            held_dir_ = cfg.dir;
            world_.body_poses.erase(held_body_);
        } else if (op.name == "Move-Place") {
            const std::string& body = op.inputs.at(0);
            const ResolvedConfig& cfg = products_.at(op.inputs.at(1));
            res = check_place(world_, body, cfg.region_pose, cfg.region, &detail);
            checked = true;
            check_region = cfg.region;
            if (res.satisfied) {
                world_.body_poses[body] = cfg.pose;
                placed_by_var_[body] = cfg.pose_var;
                held_body_.clear();
                held_dir_.clear();
            }
        } else {
            throw std::logic_error("unknown transition operator '" + op.name + "'");
        }

        ++next_op_;
        if (!checked) continue;

        const Region* region = world_.find_region(check_region);
        const std::string region_tag = region ? region_class(*region) : "";

        if (res.satisfied && inject_failure()) {
            res.mark_failed(op.name);
            detail.reach_ok = false;  // injected failures read as reach faults
        }

        CheckEvent ev = run_check(occ, std::move(res), detail);
        ev.region_tag = region_tag;
        const bool ok = ev.result.satisfied;
        step.events.push_back(std::move(ev));
        if (!ok) {
            step.passed = false;
            failed_ = true;
            FailureTrace tr = build_trace(occ, step.events.back().hits);
            tr.hits = step.events.back().hits;
            tr.region_tag = region_tag;
            if (!step.events.back().detail.containment_ok && region)
                tr.context_objects.emplace_back(region->name, region_tag);
            trace_ = std::move(tr);
            return;
        }
    }
}

EvalSession::Step EvalSession::bind_next(const Binding& value) {
    if (failed_) throw std::logic_error("bind_next after a failed evaluation");
    if (bound_ >= task_->total_depth()) throw std::logic_error("bind_next past full depth");
    const DecisionVar& var = task_->decision_vars()[static_cast<size_t>(bound_)];
    if (!in_domain(var, value))
        throw std::invalid_argument("binding out of domain for variable '" + var.name + "'");

    // Consume the decision operator.
    const Skeleton& sk = task_->skeleton;
    while (next_op_ < sk.op_count() && sk.op(next_op_).layer != Layer::decision) ++next_op_;
    if (next_op_ >= sk.op_count()) throw std::logic_error("no decision operator left");
    ++next_op_;

    values_.push_back(value);
    ++bound_;

    Step step;
    run_transition_ops(step);
    if (step.passed) d_end_ = bound_;
    return step;
}

SimOutcome evaluate_bindings(const Task& task, const BindingVector& x) {
    if (static_cast<int>(x.size()) > task.total_depth())
        throw std::invalid_argument("binding vector longer than skeleton depth");
    EvalSession session(task);
    SimOutcome out;
    for (const Binding& b : x) {
        EvalSession::Step step = session.bind_next(b);
        for (CheckEvent& ev : step.events) out.per_constraint.push_back(ev.result);
        if (!step.passed) break;
    }
    out.feasible = session.complete();
    out.d_end = session.d_end();
    out.failure_trace = session.failure_trace();
    return out;
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

std::vector<CandidateContext> enumerate_candidates(const Task& task) {
    const Skeleton& sk = task.skeleton;
    std::vector<CandidateContext> out;

    // Static walk mirroring the session: track the held body and which bodies
    // have been placed (and by which decision) before each operator.
    std::map<std::string, int> placed_by;  // body -> pose var
    std::string held;

    // Static pose-reference resolution for an Inv-kin occurrence.
    auto resolve_region = [&](int occ) -> std::pair<std::string, std::string> {
        // returns (region name, moved body)
        const Operator& op = sk.op(occ);
        std::string body, region;
        for (const std::string& in : op.inputs) {
            auto ct = task.constant_types.find(in);
            const std::string type = ct != task.constant_types.end() ? ct->second : "";
            if (type == "body") body = in;
            if (type == "fixed-pose") region = task.initial_placement.at(task.fixed_pose_body.at(in)).first;
            const int vi = sk.var_index(in);
            if (vi >= 0 && !sk.decision_vars()[static_cast<size_t>(vi)].is_discrete())
                region = task.pose_var_region[static_cast<size_t>(vi)];
        }
        return {region, body};
    };

    auto add_for_check = [&](int occ, const std::string& moved_body, const std::string& region,
                             bool grasp, bool place) {
        const std::string rtag = region_class(*task.world.find_region(region));
        std::set<std::string> seen_classes;
        for (const Box& obs : task.world.obstacles) {
            const std::string cls = object_class(obs);
            if (!seen_classes.insert(cls).second) continue;
            CandidateContext c;
            c.op_occ = occ;
            c.kind = CandidateContext::Kind::collision;
            c.object_class = cls;
            c.region_tag = rtag;
            out.push_back(c);
        }
        for (const Box& b : task.world.bodies) {
            if (b.name == moved_body) continue;
            CandidateContext c;
            c.op_occ = occ;
            c.kind = CandidateContext::Kind::collision;
            c.object_class = object_class(b);
            c.region_tag = rtag;
            auto it = placed_by.find(b.name);
            if (it != placed_by.end() && it->second >= 0) {
                c.collider_pose_var = it->second;
            } else {
                c.collider_fixed_body = true;
            }
            out.push_back(c);
        }
        if (grasp) {
            CandidateContext c;
            c.op_occ = occ;
            c.kind = CandidateContext::Kind::reach;
            c.region_tag = rtag;
            out.push_back(c);
        }
        if (place) {
            CandidateContext c;
            c.op_occ = occ;
            c.kind = CandidateContext::Kind::containment;
            c.object_class = rtag;
            c.region_tag = rtag;
            out.push_back(c);
        }
    };

    for (int occ = 0; occ < sk.op_count(); ++occ) {
        const Operator& op = sk.op(occ);
        if (op.layer == Layer::decision) continue;
        if (op.name == "Inv-kin") {
            auto [region, body] = resolve_region(occ);
            add_for_check(occ, body, region, /*grasp=*/true, /*place=*/false);
        } else if (op.name == "Plan-motion") {
            if (op.inputs.at(0) != "config0" && !held.empty()) {
                // target region via the destination config's Inv-kin
                const int ik = sk.producer_of(op.inputs.at(1));
                auto [region, body] = resolve_region(ik);
                add_for_check(occ, held, region, false, false);
            }
        } else if (op.name == "Move-Pick") {
            held = op.inputs.at(0);
        } else if (op.name == "Move-Place") {
            const int pm = sk.producer_of(op.inputs.at(1));
            const int ik = sk.producer_of(sk.op(pm).inputs.at(1));
            auto [region, body] = resolve_region(ik);
            add_for_check(occ, op.inputs.at(0), region, false, /*place=*/true);
            // commit
            int pose_var = -1;
            for (const std::string& in : sk.op(ik).inputs) {
                const int vi = sk.var_index(in);
                if (vi >= 0 && !sk.decision_vars()[static_cast<size_t>(vi)].is_discrete()) pose_var = vi;
            }
            placed_by[op.inputs.at(0)] = pose_var;
            held.clear();
        }
    }

    // A constraint type needs at least one decision variable to learn over;
    // checks fed purely by constants cannot form one.
    std::vector<CandidateContext> filtered;
    for (const CandidateContext& c : out)
        if (!sk.chain_decision_vars(c.op_occ).empty() || c.collider_pose_var >= 0)
            filtered.push_back(c);
    return filtered;
}

}  // namespace cpbo
