#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpbo/geom.hpp"
#include "cpbo/skeleton.hpp"

namespace cpbo {

/// Grasp approach directions. `front` approaches the -x face, `back` the +x
/// face, `left` the -y face, `right` the +y face, `top` the +z face.
extern const std::vector<std::string> kGraspDirs;

/// Placement coordinates within a region frame, each in [0,1]. `w` is the yaw
/// fraction over [0, 2*pi) for tasks with yawed placement; otherwise it is
/// carried through the binding but the world treats yaw as 0.
struct Pose {
    double u = 0.5, v = 0.5, w = 0.0;
};

/// World-frame pose of a body: box center plus yaw about +z.
struct WorldPose {
    Vec3 center;
    double yaw = 0.0;
};

struct Box {
    std::string name;
    std::string tag;  // body | obstacle | shelf
    Vec3 half;        // strictly positive half extents, meters
    Vec3 center;      // static objects only; movable bodies use body_poses
};

/// Rectangular support area on a horizontal surface.
struct Region {
    std::string name;
    double cx = 0.0, cy = 0.0;  // world-frame center
    double hx = 0.0, hy = 0.0;  // half extents
    double z = 0.0;             // surface height
};

struct Gripper {
    double approach_depth = 0.06;
    double clearance = 0.01;
};

struct WorldState {
    std::vector<Box> bodies;     // movable
    std::vector<Box> obstacles;  // static, tag obstacle or shelf
    std::vector<Region> regions;
    std::map<std::string, WorldPose> body_poses;  // current pose per body
    Aabb robot_reach;
    Gripper gripper;
    double lift_height = 0.05;  // carried body bottom height during transfer
    bool yaw_poses = false;     // interpret Pose.w as yaw

    const Box* find_body(const std::string& name) const;
    const Box* find_obstacle(const std::string& name) const;
    const Region* find_region(const std::string& name) const;
};

/// Outcome of one geometric constraint check. `y_cp` is the severity label
/// recorded into constraint datasets: -1 when satisfied, 0 when violated.
struct ConstraintResult {
    bool satisfied = true;
    double y_cp = -1.0;
    std::vector<std::string> colliding_obstacles;  // every intersecting object
    std::string failure_op;                        // empty when satisfied

    void mark_failed(const std::string& op) {
        satisfied = false;
        y_cp = 0.0;
        failure_op = op;
    }
};

/// Side results a check exposes beyond the pass/fail verdict, used for
/// labelling experience data per candidate constraint.
struct CheckDetail {
    bool reach_ok = true;        // grasp: approach volume inside robot reach
    bool containment_ok = true;  // place: footprint inside the region
};

/// A colliding object with its provenance: `pose_decision` is the index of
/// the decision that placed a colliding movable body (-1 otherwise);
/// `at_fixed_pose` marks a movable body still at its initial pose.
struct ObjectHit {
    std::string name;
    std::string class_tag;
    int pose_decision = -1;
    bool at_fixed_pose = false;
};

/// Why one evaluation episode stopped: the failing operator, the decision
/// variables feeding it, the objects involved, and the operators connecting
/// decisions to the failure. `hits` and `region_tag` carry the geometric
/// provenance needed to rebuild the causal graph exactly.
struct FailureTrace {
    int op_occ = -1;
    std::string failure_op;
    std::vector<std::string> responsible_decisions;                  // variable names, tree order
    std::vector<std::pair<std::string, std::string>> context_objects;  // (name, class tag)
    std::vector<std::string> connection_ops;
    std::vector<ObjectHit> hits;
    std::string region_tag;  // class of the region the failing check was located at
};

/// Result of evaluating a binding vector against a task.
struct SimOutcome {
    bool feasible = false;
    int d_end = 0;  // decision layers whose transition checks all passed
    std::vector<ConstraintResult> per_constraint;
    std::optional<FailureTrace> failure_trace;
};

// ---------------------------------------------------------------------------
// Geometric constraint checks
// ---------------------------------------------------------------------------

/// Gripper approach feasibility: the approach volume (a box extruded from the
/// grasped face along `dir` by the approach depth, padded transversally by
/// the clearance) must intersect no other object and lie inside robot reach.
ConstraintResult check_grasp(const WorldState& w, const std::string& body, const WorldPose& pose,
                             const std::string& dir, CheckDetail* detail = nullptr);

/// Placement feasibility: the body footprint at `target` must lie inside the
/// region rectangle and overlap no obstacle and no other resting body.
ConstraintResult check_place(const WorldState& w, const std::string& body, const Pose& target,
                             const std::string& region, CheckDetail* detail = nullptr);

/// Transfer feasibility: three-segment swept volume (lift, translate at the
/// lift height, lower) of body plus gripper must intersect no other object.
ConstraintResult check_motion(const WorldState& w, const std::string& body, const WorldPose& from,
                              const WorldPose& to, const std::string& dir,
                              CheckDetail* detail = nullptr);

/// World pose of a body center placed at region-frame coordinates.
WorldPose world_pose_on_region(const WorldState& w, const std::string& body,
                               const std::string& region, const Pose& p);

/// Stable class tag of an object: its tag plus millimeter-quantized shape,
/// e.g. "obstacle:120x60x250". Identically shaped objects across tasks share
/// a class, which is what makes constraint knowledge transferable.
std::string object_class(const Box& box);
std::string region_class(const Region& region);

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

struct Task {
    std::string id;
    WorldState world;  // initial state
    Skeleton skeleton;
    std::map<std::string, std::string> constant_types;  // identifier -> fixed-pose|config|body|region|grasp-dir
    std::map<std::string, std::string> fixed_pose_body;  // fixed-pose constant -> body it locates
    std::map<std::string, std::pair<std::string, Pose>> initial_placement;  // body -> (region, pose)
    std::vector<std::string> pose_var_region;            // per decision var: target region ("" for dirs)
    double noise_prob = 0.0;  // optional Bernoulli failure injection

    const std::vector<DecisionVar>& decision_vars() const { return skeleton.decision_vars(); }
    int total_depth() const { return skeleton.total_depth(); }
};

/// Loads one of the benchmark tasks (desk, deskP, regrasp, pack, packP1,
/// packP2, packP3) from the task-file directory. The directory is the
/// compiled-in repo default, overridable with the CPBO_TASK_DIR environment
/// variable.
Task build_task(const std::string& task_id);
Task load_task_file(const std::string& path);

/// Predecessor chain used for cross-task knowledge transfer, in run order.
std::vector<std::string> predecessor_tasks(const std::string& task_id);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// One executed constraint check with everything needed to label experience
/// data: which operator ran, the verdict, per-object hits, and the side
/// conditions (reach, containment).
struct CheckEvent {
    int op_occ = -1;
    ConstraintResult result;
    CheckDetail detail;
    std::vector<ObjectHit> hits;
    std::string region_tag;  // class of the region the check was located at
};

/// Incremental evaluation of a binding prefix against a task: binds one
/// decision at a time and executes the transition layer that follows it.
/// Used by the tree search; `evaluate_bindings` drives the same machinery.
class EvalSession {
  public:
    explicit EvalSession(const Task& task, uint64_t noise_seed = 0);

    struct Step {
        bool passed = true;
        std::vector<CheckEvent> events;
    };

    /// Binds the next decision variable and runs its transition layer.
    /// Throws std::invalid_argument when the value is out of domain and
    /// std::logic_error when called after a failure or past full depth.
    Step bind_next(const Binding& value);

    int bound_count() const { return bound_; }
    bool has_failed() const { return failed_; }
    bool complete() const { return bound_ == task_->total_depth() && !failed_; }
    /// Decision layers completed before failure (== bound_count on success).
    int d_end() const { return d_end_; }
    const std::optional<FailureTrace>& failure_trace() const { return trace_; }
    const BindingVector& bound_values() const { return values_; }

  private:
    struct ResolvedConfig {  // product of an Inv-kin operator
        std::string body;
        WorldPose pose;
        std::string dir;
        std::string region;
        int pose_var = -1;  // decision that chose the pose, -1 for fixed poses
        Pose region_pose;   // region-frame coordinates of `pose`
        bool robot_only = false;
    };

    void run_transition_ops(Step& step);
    CheckEvent run_check(int occ, ConstraintResult res, const CheckDetail& detail);
    FailureTrace build_trace(int occ, const std::vector<ObjectHit>& hits) const;
    ResolvedConfig resolve_pose_ref(const std::string& ref, const std::string& body) const;
    std::string resolve_dir_ref(const std::string& ref) const;
    bool inject_failure();

    const Task* task_;
    WorldState world_;  // mutated as bodies move
    std::map<std::string, ResolvedConfig> products_;  // configs and trajectories
    std::map<std::string, int> placed_by_var_;        // body -> decision that placed it
    std::string held_body_;
    std::string held_dir_;
    BindingVector values_;
    int next_op_ = 0;
    int bound_ = 0;
    int d_end_ = 0;
    bool failed_ = false;
    std::optional<FailureTrace> trace_;
    uint64_t noise_state_ = 0;
};

/// Evaluates a binding vector (full, or a prefix during tree search) by
/// executing the skeleton operators in order, stopping at the first violated
/// constraint. Deterministic: identical (task, x) give identical outcomes.
SimOutcome evaluate_bindings(const Task& task, const BindingVector& x);

// ---------------------------------------------------------------------------
// Candidate constraint enumeration
// ---------------------------------------------------------------------------

/// One potential way a check operator can fail in this task: a specific
/// collider class, a containment violation, or an out-of-reach approach.
/// Enumerated statically from skeleton and scene; used both to label feasible
/// experience and to match stored constraint types when activating transfer.
struct CandidateContext {
    enum class Kind { collision, containment, reach };
    int op_occ = -1;
    Kind kind = Kind::collision;
    std::string object_class;    // collider class; region class for containment
    std::string region_tag;      // class of the region the check is located at
    int collider_pose_var = -1;  // decision that placed the collider, if any
    bool collider_fixed_body = false;
};

std::vector<CandidateContext> enumerate_candidates(const Task& task);

}  // namespace cpbo
