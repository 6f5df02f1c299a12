#include "srcp/arm_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace srcp {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Cumulative (absolute) link angles.
Vec abs_angles(const Vec& q) {
  Vec th(q.size());
  double acc = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    acc += q(i);
    th(i) = acc;
  }
  return th;
}

// COM linear Jacobian of link i (2 x n). Column j is nonzero for j <= i.
Mat com_jacobian(int i, const Vec& th, const PlantParams& p) {
  const int n = p.n_joints;
  Mat J = Mat::Zero(2, n);
  // d p_i / d q_j = sum over segments whose absolute angle depends on q_j.
  for (int j = 0; j <= i; ++j) {
    double jx = 0, jy = 0;
    for (int k = j; k < i; ++k) {
      jx += -p.link_length(k) * std::sin(th(k));
      jy += p.link_length(k) * std::cos(th(k));
    }
    jx += -p.link_com(i) * std::sin(th(i));
    jy += p.link_com(i) * std::cos(th(i));
    J(0, j) = jx;
    J(1, j) = jy;
  }
  return J;
}

// COM acceleration of link i with q̈ = 0 (centripetal terms only).
Eigen::Vector2d com_bias_accel(int i, const Vec& th, const Vec& thd,
                               const PlantParams& p) {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  for (int k = 0; k < i; ++k) {
    const double w2 = thd(k) * thd(k);
    a.x() += -p.link_length(k) * w2 * std::cos(th(k));
    a.y() += -p.link_length(k) * w2 * std::sin(th(k));
  }
  const double w2 = thd(i) * thd(i);
  a.x() += -p.link_com(i) * w2 * std::cos(th(i));
  a.y() += -p.link_com(i) * w2 * std::sin(th(i));
  return a;
}

}  // namespace

JointLimits JointLimits::uniform(int n, double qmin, double qmax, double qd,
                                 double qdd) {
  JointLimits lim;
  lim.q_min = Vec::Constant(n, qmin);
  lim.q_max = Vec::Constant(n, qmax);
  lim.qd_lim = Vec::Constant(n, qd);
  lim.qdd_lim = Vec::Constant(n, qdd);
  lim.validate();
  return lim;
}

void JointLimits::validate() const {
  const auto n = q_min.size();
  require(n > 0 && q_max.size() == n && qd_lim.size() == n && qdd_lim.size() == n,
          "joint limits: inconsistent sizes");
  require((q_min.array() < q_max.array()).all(), "joint limits: min >= max");
  require((qd_lim.array() > 0).all() && (qdd_lim.array() > 0).all(),
          "joint limits: rate limits must be positive");
}

PlantParams PlantParams::two_link_default() {
  PlantParams p;
  p.n_joints = 2;
  p.link_mass = Vec(2);
  p.link_mass << 1.0, 0.8;
  p.link_length = Vec(2);
  p.link_length << 0.5, 0.4;
  p.link_com = Vec(2);
  p.link_com << 0.25, 0.2;
  // Uniform rods about their com.
  p.link_inertia = Vec(2);
  p.link_inertia << 1.0 * 0.5 * 0.5 / 12.0, 0.8 * 0.4 * 0.4 / 12.0;
  p.joint_stiffness = Vec::Constant(2, 300.0);
  p.joint_damping = Vec::Constant(2, 0.02);
  p.motor_inertia = Vec::Constant(2, 0.02);
  p.motor_damping = Vec::Constant(2, 0.05);
  p.torque_limit = Vec::Constant(2, 20.0);
  p.encoder_noise_q = Vec::Constant(2, 5e-4);
  p.encoder_noise_qd = Vec::Constant(2, 5e-3);
  p.gravity = 9.81;
  p.latency_steps = 2;
  p.inner_dt = 0.002;
  return p;
}

void PlantParams::validate() const {
  const int n = n_joints;
  require(n > 0, "plant: n_joints must be positive");
  auto sized = [n](const Vec& v) { return v.size() == n; };
  require(sized(link_mass) && sized(link_length) && sized(link_com) &&
              sized(link_inertia) && sized(joint_stiffness) &&
              sized(joint_damping) && sized(motor_inertia) &&
              sized(motor_damping) && sized(torque_limit) &&
              sized(encoder_noise_q) && sized(encoder_noise_qd),
          "plant: parameter vector size != n_joints");
  require((link_mass.array() > 0).all() && (link_length.array() > 0).all() &&
              (link_inertia.array() > 0).all() &&
              (joint_stiffness.array() > 0).all() &&
              (motor_inertia.array() > 0).all(),
          "plant: masses, lengths, inertias, stiffness must be positive");
  require((link_com.array() > 0).all() &&
              (link_com.array() <= link_length.array()).all(),
          "plant: com offsets must lie on the link");
  require((joint_damping.array() >= 0).all() &&
              (motor_damping.array() >= 0).all() &&
              (torque_limit.array() > 0).all(),
          "plant: damping must be nonnegative, torque limit positive");
  require((encoder_noise_q.array() >= 0).all() &&
              (encoder_noise_qd.array() >= 0).all(),
          "plant: noise std must be nonnegative");
  require(inner_dt > 0, "plant: inner_dt must be positive");
  require(latency_steps >= 0, "plant: latency_steps must be nonnegative");
  require(payload_mass >= 0, "plant: payload must be nonnegative");
}

Mat mass_matrix(const Vec& q, const PlantParams& p) {
  const int n = p.n_joints;
  const Vec th = abs_angles(q);
  Mat M = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Mat J = com_jacobian(i, th, p);
    M.noalias() += p.link_mass(i) * (J.transpose() * J);
    // Angular Jacobian row is the 0/1 indicator of joints <= i.
    for (int a = 0; a <= i; ++a)
      for (int b = 0; b <= i; ++b) M(a, b) += p.link_inertia(i);
  }
  if (p.rigid) M += p.motor_inertia.asDiagonal();
  return M;
}

Vec bias_forces(const Vec& q, const Vec& qd, const PlantParams& p) {
  const int n = p.n_joints;
  const Vec th = abs_angles(q);
  const Vec thd = abs_angles(qd);  // cumulative sums of q̇ are the angular rates
  Vec h = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Mat J = com_jacobian(i, th, p);
    h.noalias() += p.link_mass(i) * (J.transpose() * com_bias_accel(i, th, thd, p));
  }
  return h;
}

Vec gravity_torque(const Vec& q, const PlantParams& p) {
  const int n = p.n_joints;
  const Vec th = abs_angles(q);
  Vec g = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Mat J = com_jacobian(i, th, p);
    g.noalias() += p.link_mass(i) * p.gravity * J.row(1).transpose();
  }
  return g;
}

PlantDeriv dynamics_derivative(const Vec& q, const Vec& qd, const Vec& qm,
                               const Vec& qmd, const Vec& applied_torque,
                               const PlantParams& p) {
  PlantDeriv d;
  d.dq = qd;
  const Mat M = mass_matrix(q, p);
  const Vec h = bias_forces(q, qd, p);
  const Vec g = gravity_torque(q, p);
  if (p.rigid) {
    const Vec damp = (p.joint_damping + p.motor_damping).cwiseProduct(qd);
    d.dqd = M.ldlt().solve(applied_torque - h - g - damp);
    d.dqm = d.dq;
    d.dqmd = d.dqd;
    return d;
  }
  const Vec spring = p.joint_stiffness.cwiseProduct(qm - q);
  d.dqd = M.ldlt().solve(spring - h - g - p.joint_damping.cwiseProduct(qd));
  d.dqm = qmd;
  d.dqmd = (applied_torque - spring - p.motor_damping.cwiseProduct(qmd))
               .cwiseQuotient(p.motor_inertia);
  return d;
}

PlantState make_initial_state(const Vec& q0, const PlantParams& p) {
  PlantState s;
  s.q = q0;
  s.qd = Vec::Zero(p.n_joints);
  // Motor offset puts the spring in static equilibrium against gravity.
  s.qm = p.rigid ? q0
                 : Vec(q0 + gravity_torque(q0, p).cwiseQuotient(p.joint_stiffness));
  s.qmd = Vec::Zero(p.n_joints);
  s.torque_delay.assign(static_cast<std::size_t>(p.latency_steps),
                        Vec::Zero(p.n_joints));
  s.time = 0.0;
  return s;
}

void plant_step(PlantState& s, const Vec& torque_command, const PlantParams& p) {
  s.torque_delay.push_back(torque_command);
  const Vec u = s.torque_delay.front();
  s.torque_delay.pop_front();

  const double dt = p.inner_dt;
  auto f = [&](const Vec& q, const Vec& qd, const Vec& qm, const Vec& qmd) {
    return dynamics_derivative(q, qd, qm, qmd, u, p);
  };
  const PlantDeriv k1 = f(s.q, s.qd, s.qm, s.qmd);
  const PlantDeriv k2 = f(s.q + 0.5 * dt * k1.dq, s.qd + 0.5 * dt * k1.dqd,
                          s.qm + 0.5 * dt * k1.dqm, s.qmd + 0.5 * dt * k1.dqmd);
  const PlantDeriv k3 = f(s.q + 0.5 * dt * k2.dq, s.qd + 0.5 * dt * k2.dqd,
                          s.qm + 0.5 * dt * k2.dqm, s.qmd + 0.5 * dt * k2.dqmd);
  const PlantDeriv k4 = f(s.q + dt * k3.dq, s.qd + dt * k3.dqd,
                          s.qm + dt * k3.dqm, s.qmd + dt * k3.dqmd);
  const double w = dt / 6.0;
  s.q += w * (k1.dq + 2 * k2.dq + 2 * k3.dq + k4.dq);
  s.qd += w * (k1.dqd + 2 * k2.dqd + 2 * k3.dqd + k4.dqd);
  if (p.rigid) {
    s.qm = s.q;
    s.qmd = s.qd;
  } else {
    s.qm += w * (k1.dqm + 2 * k2.dqm + 2 * k3.dqm + k4.dqm);
    s.qmd += w * (k1.dqmd + 2 * k2.dqmd + 2 * k3.dqmd + k4.dqmd);
  }
  s.time += dt;

  if (!s.q.allFinite() || !s.qd.allFinite() || !s.qm.allFinite() ||
      !s.qmd.allFinite()) {
    throw std::runtime_error("plant diverged at t=" + std::to_string(s.time) +
                             " (unstable gains or timestep)");
  }
}

BaselineGains BaselineGains::detuned_default() {
  BaselineGains g;
  // ~60% of a well-tuned motor-side PD for the default two-link plant.
  g.kp = Vec(2);
  g.kp << 48.0, 30.0;
  g.kd = Vec(2);
  g.kd << 2.4, 1.5;
  g.gravity_scale = 0.7;
  return g;
}

void BaselineGains::validate(int n) const {
  require(kp.size() == n && kd.size() == n, "gains: size != n_joints");
  require((kp.array() > 0).all() && (kd.array() >= 0).all(),
          "gains: kp must be positive, kd nonnegative");
  require(gravity_scale >= 0, "gains: gravity scale must be nonnegative");
}

Vec baseline_controller(const Vec& q_des, const Vec& qd_des, const Vec& q_motor,
                        const Vec& qd_motor, const Vec& q_link_meas,
                        const BaselineGains& gains, const PlantParams& p) {
  Vec u = gains.kp.cwiseProduct(q_des - q_motor) +
          gains.kd.cwiseProduct(qd_des - qd_motor) +
          gains.gravity_scale * gravity_torque(q_link_meas, p);
  return u.cwiseMax(-p.torque_limit).cwiseMin(p.torque_limit);
}

ObservedPoint observe(const PlantState& s, const PlantParams& p,
                      std::mt19937_64& rng) {
  ObservedPoint o;
  o.q = s.q;
  o.qd = s.qd;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < o.q.size(); ++i)
    o.q(i) += p.encoder_noise_q(i) * unit(rng);
  for (Eigen::Index i = 0; i < o.qd.size(); ++i)
    o.qd(i) += p.encoder_noise_qd(i) * unit(rng);
  return o;
}

Eigen::Vector2d forward_kinematics(const Vec& q, const PlantParams& p) {
  const Vec th = abs_angles(q);
  Eigen::Vector2d ee = Eigen::Vector2d::Zero();
  for (int i = 0; i < p.n_joints; ++i) {
    ee.x() += p.link_length(i) * std::cos(th(i));
    ee.y() += p.link_length(i) * std::sin(th(i));
  }
  return ee;
}

PlantParams set_payload(const PlantParams& p, double mass) {
  require(mass >= 0, "payload: mass must be nonnegative");
  PlantParams out = p;
  if (mass == 0.0) return out;
  const int i = p.n_joints - 1;
  const double m0 = p.link_mass(i);
  const double c0 = p.link_com(i);
  const double l = p.link_length(i);
  const double m1 = m0 + mass;
  const double c1 = (m0 * c0 + mass * l) / m1;
  // Parallel-axis transfer: inertia about the joint, minus the new com term.
  const double i_joint = p.link_inertia(i) + m0 * c0 * c0 + mass * l * l;
  out.link_mass(i) = m1;
  out.link_com(i) = c1;
  out.link_inertia(i) = i_joint - m1 * c1 * c1;
  out.payload_mass = p.payload_mass + mass;
  return out;
}

}  // namespace srcp
