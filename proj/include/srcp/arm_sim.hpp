// Planar n-link series-elastic arm (Spong model) with an inner-loop PD
// baseline controller, actuator latency, and encoder noise.
//
// Link side:   M(q) q̈ + h(q,q̇) + g(q) + d∘q̇ = k_s∘(q_m − q)
// Motor side:  J_m q̈_m = u − k_s∘(q_m − q) − b∘q̇_m
//
// Angles are relative joint angles; link 1 points along +x at q = 0 and
// gravity acts along −y.
#pragma once

#include <deque>
#include <random>

#include "srcp/neural.hpp"

namespace srcp {

struct JointLimits {
  Vec q_min, q_max;  // rad
  Vec qd_lim;        // rad/s, > 0
  Vec qdd_lim;       // rad/s^2, > 0

  static JointLimits uniform(int n, double qmin, double qmax, double qd, double qdd);
  void validate() const;
};

struct PlantParams {
  int n_joints = 2;
  Vec link_mass;        // kg
  Vec link_length;      // m
  Vec link_com;         // m, joint to center of mass
  Vec link_inertia;     // kg m^2 about the com
  Vec joint_stiffness;  // N m / rad
  Vec joint_damping;    // N m s / rad, link side
  Vec motor_inertia;    // kg m^2, reflected
  Vec motor_damping;    // N m s / rad
  Vec torque_limit;     // N m, symmetric
  Vec encoder_noise_q;  // rad, std per joint
  Vec encoder_noise_qd; // rad/s, std per joint
  double gravity = 9.81;
  double payload_mass = 0.0;  // bookkeeping; set_payload folds it into the last link
  int latency_steps = 2;
  double inner_dt = 0.002;
  // Springs locked and motor inertia lumped onto the links; used by the
  // energy-conservation tests.
  bool rigid = false;

  static PlantParams two_link_default();
  void validate() const;
};

struct PlantState {
  Vec q, qd;    // link side
  Vec qm, qmd;  // motor side
  std::deque<Vec> torque_delay;  // pending commands, length == latency_steps
  double time = 0.0;
};

struct ObservedPoint {
  Vec q, qd;
};

struct PlantDeriv {
  Vec dq, dqd, dqm, dqmd;
};

Mat mass_matrix(const Vec& q, const PlantParams& p);
// Coriolis and centrifugal terms h(q, q̇); excludes gravity and damping.
Vec bias_forces(const Vec& q, const Vec& qd, const PlantParams& p);
Vec gravity_torque(const Vec& q, const PlantParams& p);

PlantDeriv dynamics_derivative(const Vec& q, const Vec& qd, const Vec& qm,
                               const Vec& qmd, const Vec& applied_torque,
                               const PlantParams& p);

PlantState make_initial_state(const Vec& q0, const PlantParams& p);

// One RK4 step of inner_dt. The command enters the delay line; the oldest
// queued command is the torque actually applied. Throws on non-finite state.
void plant_step(PlantState& s, const Vec& torque_command, const PlantParams& p);

struct BaselineGains {
  Vec kp, kd;                  // motor-side PD
  double gravity_scale = 0.7;  // deliberate feedforward mismatch

  static BaselineGains detuned_default();
  void validate(int n) const;
};

// u = K_p(q_des − q_m) + K_d(q̇_des − q̇_m) + gravity_scale·g(q_meas),
// clamped to torque limits. q_meas is the (noisy) link-side measurement.
Vec baseline_controller(const Vec& q_des, const Vec& qd_des, const Vec& q_motor,
                        const Vec& qd_motor, const Vec& q_link_meas,
                        const BaselineGains& gains, const PlantParams& p);

// Link-side state plus zero-mean Gaussian encoder noise. Draw order: all q
// entries, then all q̇ entries.
ObservedPoint observe(const PlantState& s, const PlantParams& p,
                      std::mt19937_64& rng);

Eigen::Vector2d forward_kinematics(const Vec& q, const PlantParams& p);

// Composite-body update: point payload at the tip of the last link.
PlantParams set_payload(const PlantParams& p, double mass);

}  // namespace srcp
