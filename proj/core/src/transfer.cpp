#include "posekit/transfer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "posekit/error.hpp"
#include "posekit/metrics.hpp"
#include "posekit/optimize.hpp"
#include "posekit/rotation.hpp"

namespace posekit {

void TransferConfig::validate() const {
  loss_weights.validate();
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("config: temperature must be positive");
  }
  if (optimizer.max_iters < 0) throw ValidationError("config: optimizer.max_iters must be >= 0");
  if (!(optimizer.step_size > 0.0)) throw ValidationError("config: optimizer.step_size must be > 0");
  if (!(optimizer.tolerance >= 0.0)) throw ValidationError("config: optimizer.tolerance must be >= 0");
  if (!(refinement.ridge >= 0.0)) throw ValidationError("config: refinement.ridge must be >= 0");
  if (refinement.max_iters < 0) throw ValidationError("config: refinement.max_iters must be >= 0");
}

namespace {

// Everything that stays fixed while the twists (and radii) are fitted.
class TransferProblem {
 public:
  TransferProblem(const Mesh& source, const KeypointSet& source_kp, const KeypointSet& target_kp,
                  const TransferConfig& config, const TransferInputs& inputs)
      : source_(source), source_kp_(source_kp), target_kp_(target_kp), config_(config),
        inputs_(inputs), bones_(config.tree.bone_count()) {
    config.validate();
    source_kp.validate(config.tree);
    target_kp.validate(config.tree);

    const PosedMesh* canonical = inputs.canonical;
    const Mesh& canonical_mesh = canonical ? canonical->mesh : source;
    const KeypointSet& canonical_kp = canonical ? canonical->keypoints : source_kp;
    if (canonical) {
      canonical_kp.validate(config.tree);
      if (!canonical_mesh.same_connectivity(source)) {
        throw ValidationError("pose_transfer: canonical mesh does not share the source connectivity");
      }
    }
    gmm_ = make_gmm_params(canonical_kp, config.tree, config.temperature);
    canonical_vertices_ = canonical_mesh.vertices();
    pseudo_weights_ = gmm_weights(canonical_vertices_, gmm_);

    for (const Mesh* ref : {inputs.self_reference, inputs.cycle_reference}) {
      if (ref && !ref->same_connectivity(source)) {
        throw ValidationError("pose_transfer: reconstruction reference does not share the source connectivity");
      }
    }
    if (inputs.regressor) keypoint_term_ = keypoint_loss(regress_keypoints(source, *inputs.regressor), source_kp);
  }

  [[nodiscard]] Eigen::Index parameter_count() const {
    return static_cast<Eigen::Index>(config_.optimize_radii ? 2 * bones_ : bones_);
  }

  [[nodiscard]] Eigen::VectorXd start_point() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(parameter_count());
    if (config_.optimize_radii) {
      for (std::size_t k = 0; k < bones_; ++k) {
        x[static_cast<Eigen::Index>(bones_ + k)] = std::log(gmm_.radii[k]);
      }
    }
    return x;
  }

  struct Evaluation {
    TwistAngles twists;
    std::vector<double> radii;
    BoneTransformSet transforms;
    SkinningMatrix weights;
    std::vector<Vec3> vertices;
    LossBreakdown losses;
    /// Total without the constant keypoint diagnostic; this is what descends.
    double objective = 0.0;
  };

  [[nodiscard]] Evaluation evaluate(const Eigen::VectorXd& x) const {
    Evaluation e;
    e.twists.phi.assign(x.data(), x.data() + bones_);
    const IkSolution ik = scalable_ik(source_kp_, target_kp_, e.twists, config_.tree);
    e.transforms = forward_kinematics(source_kp_, ik, config_.tree);
    if (config_.optimize_radii) {
      GmmParams params = gmm_;
      for (std::size_t k = 0; k < bones_; ++k) {
        params.radii[k] = std::exp(x[static_cast<Eigen::Index>(bones_ + k)]);
      }
      e.radii = params.radii;
      e.weights = gmm_weights(canonical_vertices_, params);
    } else {
      e.radii = gmm_.radii;
      e.weights = pseudo_weights_;
    }
    e.vertices = lbs_vertices(source_.vertices(), e.weights, e.transforms.transforms);
    e.losses = score(e.vertices, e.weights, &e.objective);
    return e;
  }

  [[nodiscard]] double objective(const Eigen::VectorXd& x) const {
    try {
      return evaluate(x).objective;
    } catch (const ValidationError&) {
      // e.g. a radius step that under/overflows; the line search backs off.
      return std::numeric_limits<double>::quiet_NaN();
    }
  }

  // The keypoint term is constant in the parameters. It is kept out of
  // `objective` so it cannot swamp the finite-difference gradient.
  [[nodiscard]] LossBreakdown score(std::span<const Vec3> deformed, const SkinningMatrix& weights,
                                    double* objective = nullptr) const {
    LossBreakdown parts;
    if (config_.optimize_radii) parts.skin = skinning_loss(weights, pseudo_weights_);
    parts.edge = edge_loss(source_, deformed);
    if (const Mesh* ref = inputs_.self_reference) {
      parts.self = pmd(deformed, ref->vertices());
      parts.edge += edge_loss(*ref, deformed);
    }
    if (const Mesh* ref = inputs_.cycle_reference) {
      parts.cycle = pmd(deformed, ref->vertices());
      parts.edge += edge_loss(*ref, deformed);
    }
    LossBreakdown scored = total_loss(parts, config_.loss_weights);
    if (objective) *objective = scored.total;
    scored.keypoint = keypoint_term_;
    scored.total += config_.loss_weights.keypoint * keypoint_term_;
    return scored;
  }

 private:
  const Mesh& source_;
  const KeypointSet& source_kp_;
  const KeypointSet& target_kp_;
  const TransferConfig& config_;
  const TransferInputs& inputs_;
  std::size_t bones_;
  GmmParams gmm_;
  std::vector<Vec3> canonical_vertices_;
  SkinningMatrix pseudo_weights_;
  double keypoint_term_ = 0.0;
};

}  // namespace

TransferResult pose_transfer(const Mesh& source, const KeypointSet& source_kp,
                             const KeypointSet& target_kp, const TransferConfig& config,
                             const TransferInputs& inputs) {
  const TransferProblem problem(source, source_kp, target_kp, config, inputs);

  TransferResult result;
  const ScalarObjective objective = [&problem](const Eigen::VectorXd& x) { return problem.objective(x); };
  const GradientFunction gradient = [&objective](const Eigen::VectorXd& x) {
    return numerical_gradient(objective, x);
  };
  const AcceptCallback record = [&](int, const Eigen::VectorXd& x, double) {
    result.history.push_back(problem.evaluate(x).losses);
  };

  DescentOptions options;
  options.max_iters = config.optimizer.max_iters;
  options.step_size = config.optimizer.step_size;
  options.tolerance = config.optimizer.tolerance;
  const DescentResult fit = gradient_descent(objective, gradient, problem.start_point(), options, record);

  auto best = problem.evaluate(fit.x);
  for (double& phi : best.twists.phi) phi = wrap_angle(phi);
  result.coarse = source.with_vertices(std::move(best.vertices));
  result.refined = config.refinement.enabled ? refine(result.coarse, source, config) : result.coarse;
  result.transforms = std::move(best.transforms);
  result.twists = std::move(best.twists);
  result.radii = std::move(best.radii);
  result.final_losses = problem.score(result.refined.vertices(), best.weights);
  result.weights = std::move(best.weights);
  result.iterations = fit.iterations;
  result.converged = fit.converged;
  return result;
}

Mesh refine(const Mesh& coarse, const Mesh& source, const TransferConfig& config) {
  if (!coarse.same_connectivity(source)) throw ValidationError("refine: connectivity mismatch");
  const std::size_t n = coarse.vertex_count();
  if (n == 0) return coarse;
  const double ridge = config.refinement.ridge;
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto& base = coarse.vertices();

  const auto displaced = [&](const Eigen::VectorXd& dv) {
    std::vector<Vec3> v(base);
    for (std::size_t i = 0; i < n; ++i) v[i] += dv.segment<3>(static_cast<Eigen::Index>(3 * i));
    return v;
  };
  const ScalarObjective objective = [&](const Eigen::VectorXd& dv) {
    return edge_loss(source, displaced(dv)) + ridge * inv_n * dv.squaredNorm();
  };
  const GradientFunction gradient = [&](const Eigen::VectorXd& dv) {
    const auto g_edge = edge_loss_gradient(source, displaced(dv));
    Eigen::VectorXd g = (2.0 * ridge * inv_n) * dv;
    for (std::size_t i = 0; i < n; ++i) g.segment<3>(static_cast<Eigen::Index>(3 * i)) += g_edge[i];
    return g;
  };

  DescentOptions options;
  options.max_iters = config.refinement.max_iters;
  options.step_size = config.optimizer.step_size;
  options.tolerance = config.optimizer.tolerance;
  const DescentResult fit =
      gradient_descent(objective, gradient, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n)), options);
  return coarse.with_vertices(displaced(fit.x));
}

CycleResult cycle_reconstruct(const PosedMesh& source, const PosedMesh& target, const PosedMesh& third,
                              const TransferConfig& config, const CycleOptions& options) {
  if (!third.mesh.same_connectivity(target.mesh)) {
    throw ValidationError("cycle_reconstruct: third mesh does not share the target's connectivity");
  }
  CycleResult out;
  TransferInputs forward_inputs;
  forward_inputs.canonical = options.source_canonical;
  out.forward = pose_transfer(source.mesh, source.keypoints, target.keypoints, config, forward_inputs);

  switch (config.intermediate_keypoints) {
    case IntermediateKeypoints::PosedJoints:
      out.intermediate_keypoints.joints = out.forward.transforms.posed_joints;
      break;
    case IntermediateKeypoints::Regressed:
      if (!options.source_regressor) {
        throw ValidationError("cycle_reconstruct: regressed intermediate keypoints need a source regressor");
      }
      out.intermediate_keypoints = regress_keypoints(out.forward.refined, *options.source_regressor);
      break;
  }

  TransferInputs backward_inputs;
  backward_inputs.canonical = options.target_canonical;
  backward_inputs.cycle_reference = &target.mesh;
  out.backward = pose_transfer(third.mesh, third.keypoints, out.intermediate_keypoints, config,
                               backward_inputs);
  out.loss = pmd(out.backward.refined, target.mesh);
  return out;
}

SelfResult self_reconstruct(const PosedMesh& source, const PosedMesh& target,
                            const TransferConfig& config, const PosedMesh* canonical) {
  if (!source.mesh.same_connectivity(target.mesh)) {
    throw ValidationError("self_reconstruct: source and target do not share connectivity");
  }
  TransferInputs inputs;
  inputs.canonical = canonical;
  inputs.self_reference = &target.mesh;
  SelfResult out;
  out.transfer = pose_transfer(source.mesh, source.keypoints, target.keypoints, config, inputs);
  out.loss = pmd(out.transfer.refined, target.mesh);
  return out;
}

}  // namespace posekit
