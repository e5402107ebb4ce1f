"""Desk-scale kinematic simulators for the three manipulation tasks.

The tool is a point with an orientation frame. Contact rules are simple
kinematic surrogates calibrated so the raw demonstration succeeds at zero
offset: a drawer that accumulates travel while the tool pulls inside the
handle capture box, a cube that takes the component of the tool step
toward its centre while in contact, and a bar grasped by entering an
aligned capture box and lifted clear of the conveyor.

All thresholds live in EnvConfig; none are asserted to match any physical
setup beyond that calibration.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import demo as demo_mod
from . import so3
from .skill import sample_skill
from .tasks import EpisodeOutcome, Observation, Pose, TaskConfiguration

N_STEPS_DEFAULT = 201  # 10 ms equivalent over a nominal 2 s demonstration

ENV_KINDS = ("dot", "s-cpt", "d-cpt", "bmt")


@dataclass(frozen=True)
class EnvConfig:
    max_offset: float = 0.20
    n_steps: int = N_STEPS_DEFAULT
    # drawer task
    drawer_handle: tuple = (0.50, 0.00, 0.10)
    drawer_axis: tuple = (-1.0, 0.0, 0.0)
    drawer_capture_half: tuple = (0.03, 0.04, 0.03)
    drawer_travel_success: float = 0.12
    drawer_travel_limit: float = 0.20
    drawer_pull: float = 0.15
    # cube-pushing task
    cube_start: tuple = (0.35, 0.00, 0.02)
    cube_half: float = 0.02
    cube_goal: tuple = (0.85, 0.00)
    goal_tolerance: float = 0.05
    contact_radius: float = 0.03  # measured from the cube face
    push_standoff: float = 0.05
    obstacle_center: tuple = (0.45, -0.35)
    obstacle_radius: float = 0.05
    obstacle_height: float = 0.08
    # dynamic cube perturbations
    jitter_magnitude: float = 0.002
    jump_magnitude: float = 0.05
    max_jumps: int = 2
    # bar-removal task
    bar_center: tuple = (0.50, 0.00, 0.02)
    bar_half: tuple = (0.15, 0.02, 0.02)
    second_bar_center: tuple = (0.50, 0.30, 0.02)
    grasp_half: tuple = (0.05, 0.03, 0.04)
    grasp_point_lift: float = 0.01
    alignment_limit_deg: float = 15.0
    clearance_height: float = 0.12
    carry_goal: tuple = (0.50, -0.30, 0.20)
    bar_margin: float = 0.01


def _tool_down_angle(rotvec):
    """Angle between the tool approach axis R(-z) and world -z, in degrees."""
    R = so3.rotvec_to_matrix(rotvec)
    approach = R @ np.array([0.0, 0.0, -1.0])
    c = np.clip(-approach[2], -1.0, 1.0)
    return float(np.degrees(np.arccos(c)))


def _in_box(p, center, half):
    return bool(np.all(np.abs(np.asarray(p) - np.asarray(center)) <= np.asarray(half)))


def _boxes_overlap(c1, h1, c2, h2):
    return bool(np.all(np.abs(np.asarray(c1) - np.asarray(c2)) <= np.asarray(h1) + np.asarray(h2)))


class TaskEnv:
    kind = None

    def __init__(self, config=None):
        self.config = config or EnvConfig()

    # -- task configurations -------------------------------------------------

    def sample_tc(self, rng, max_offset=None):
        max_offset = self.config.max_offset if max_offset is None else max_offset
        if not 0 < max_offset <= 0.3:
            raise ValueError("max_offset must be in (0, 0.3]")
        offset = self._sample_offset(rng, max_offset)
        seed = int(rng.integers(0, 2 ** 31 - 1))
        return self._make_tc(offset, seed)

    def nominal_tc(self):
        return self._make_tc(np.zeros(2), seed=0)

    def identity_tc(self, skill):
        """Zero-offset TC whose observations sit exactly on the skill's trajectory.

        This is the demonstration's own configuration as realised by the fitted
        skill, used for idempotence checks.
        """
        from .skill import match_via_indices, query_skill

        tc = self.nominal_tc()
        indices = match_via_indices(skill, [o.position for o in tc.observations])
        new_obs = []
        for o, idx in zip(tc.observations, indices):
            q = query_skill(skill, skill.via.times[idx])
            rv = None if o.rotvec is None else q.rotation_vector
            new_obs.append(Observation(o.role, q.position, rv))
        return replace(tc, observations=tuple(new_obs))

    def demonstration(self):
        raise NotImplementedError

    def _sample_offset(self, rng, max_offset):
        return rng.uniform(-max_offset, max_offset, size=2)

    def _make_tc(self, offset, seed):
        raise NotImplementedError

    # -- execution ------------------------------------------------------------

    def rollout(self, trajectory, tc, replan=None):
        positions = np.asarray(trajectory.positions, dtype=float)
        rotvecs = np.asarray(trajectory.rotvecs, dtype=float)
        if not (np.isfinite(positions).all() and np.isfinite(rotvecs).all()):
            raise ValueError("trajectory samples must be finite")
        return self._run(positions, rotvecs, tc, replan)

    def _run(self, positions, rotvecs, tc, replan):
        raise NotImplementedError


class DrawerEnv(TaskEnv):
    """Drawer opening: pull the handle outward along the prismatic axis."""

    kind = "dot"

    def demonstration(self):
        return demo_mod.sine_arc_demo()

    def _make_tc(self, offset, seed):
        cfg = self.config
        handle = np.asarray(cfg.drawer_handle) + np.array([offset[0], offset[1], 0.0])
        pull_end = handle + cfg.drawer_pull * np.asarray(cfg.drawer_axis)
        grip_rot = np.array([0.0, 0.12, 0.0])
        observations = (
            Observation("start", np.array([0.10, 0.00, 0.20])),
            Observation("contact", handle.copy(), grip_rot.copy()),
            Observation("goal", pull_end.copy(), grip_rot.copy()),
        )
        return TaskConfiguration(
            env_kind=self.kind,
            start_pose=Pose.of([0.10, 0.00, 0.20]),
            object_pose=Pose.of(handle, grip_rot),
            goal_pose=Pose.of(pull_end, grip_rot),
            offset=np.asarray(offset, dtype=float),
            observations=observations,
            seed=seed,
        )

    def _run(self, positions, rotvecs, tc, replan):
        cfg = self.config
        axis = np.asarray(cfg.drawer_axis)
        handle0 = tc.object_pose.position
        travel = 0.0
        collided = False
        for i in range(1, len(positions)):
            p = positions[i]
            if p[2] < 0:
                collided = True
                break
            handle = handle0 + travel * axis
            step = positions[i] - positions[i - 1]
            outward = float(step @ axis)
            if outward > 0 and _in_box(positions[i - 1], handle, cfg.drawer_capture_half):
                travel = min(travel + outward, cfg.drawer_travel_limit)
        if collided:
            return EpisodeOutcome(False, "collision", positions, rotvecs,
                                  Pose.of(handle0 + travel * axis))
        success = travel >= cfg.drawer_travel_success
        return EpisodeOutcome(success, "none" if success else "goal_missed",
                              positions, rotvecs, Pose.of(handle0 + travel * axis))


class CubePushEnv(TaskEnv):
    """Cube pushing across the plane; the dynamic variant perturbs the cube online."""

    kind = "s-cpt"

    def __init__(self, config=None, dynamic=False):
        super().__init__(config)
        self.dynamic = dynamic
        if dynamic:
            self.kind = "d-cpt"

    def demonstration(self):
        return demo_mod.push_sweep_demo()

    def observations_for_cube(self, cube_xy):
        cfg = self.config
        goal = np.asarray(cfg.cube_goal)
        direction = goal - cube_xy
        n = np.linalg.norm(direction)
        direction = direction / n if n > 1e-9 else np.array([1.0, 0.0])
        z = cfg.cube_start[2]
        contact = np.array([*(cube_xy - cfg.push_standoff * direction), z])
        push_end = np.array([*(goal - cfg.push_standoff * direction), z])
        return (
            Observation("start", np.array([0.00, 0.00, 0.10])),
            Observation("contact", contact),
            Observation("goal", push_end),
        )

    def _make_tc(self, offset, seed):
        cfg = self.config
        cube = np.asarray(cfg.cube_start) + np.array([offset[0], offset[1], 0.0])
        return TaskConfiguration(
            env_kind=self.kind,
            start_pose=Pose.of([0.00, 0.00, 0.10]),
            object_pose=Pose.of(cube),
            goal_pose=Pose.of([*self.config.cube_goal, cfg.cube_start[2]]),
            offset=np.asarray(offset, dtype=float),
            observations=self.observations_for_cube(cube[:2]),
            seed=seed,
        )

    def _jump_steps(self, rng, n_steps):
        n_jumps = int(rng.integers(1, self.config.max_jumps + 1))
        steps = sorted(int(s) for s in rng.integers(int(0.25 * n_steps), int(0.75 * n_steps), size=n_jumps))
        return steps

    def _run(self, positions, rotvecs, tc, replan):
        cfg = self.config
        cube = tc.object_pose.position[:2].copy()
        obstacle = np.asarray(cfg.obstacle_center)
        contact_range = cfg.cube_half + cfg.contact_radius
        rng = np.random.default_rng(tc.seed) if self.dynamic else None
        jump_steps = self._jump_steps(rng, len(positions)) if self.dynamic else []

        executed_p = [positions[0]]
        executed_r = [rotvecs[0]]
        failure = None
        i = 1
        while i < len(positions):
            if self.dynamic:
                if cfg.jitter_magnitude > 0:
                    cube = cube + rng.uniform(-cfg.jitter_magnitude, cfg.jitter_magnitude, size=2)
                if jump_steps and i == jump_steps[0]:
                    jump_steps.pop(0)
                    angle = rng.uniform(0, 2 * np.pi)
                    cube = cube + cfg.jump_magnitude * np.array([np.cos(angle), np.sin(angle)])
                    if replan is not None:
                        new_tc = replace(
                            tc,
                            object_pose=Pose.of([*cube, cfg.cube_start[2]]),
                            observations=self.observations_for_cube(cube),
                        )
                        new_traj = replan(new_tc, i / (len(positions) - 1))
                        if new_traj is not None:
                            positions = np.asarray(new_traj.positions, dtype=float)
                            rotvecs = np.asarray(new_traj.rotvecs, dtype=float)
            p_prev, p = positions[i - 1], positions[i]
            step = p - p_prev
            to_cube = np.array([*cube, cfg.cube_start[2]]) - p_prev
            dist = np.linalg.norm(to_cube)
            if dist <= contact_range and dist > 1e-12:
                n_hat = to_cube / dist
                push = float(step @ n_hat)
                if push > 0:
                    cube = cube + push * n_hat[:2]
            if p[2] < 0:
                failure = "collision"
            elif np.linalg.norm(p[:2] - obstacle) < cfg.obstacle_radius and p[2] < cfg.obstacle_height:
                failure = "collision"
            elif np.linalg.norm(cube - obstacle) < cfg.obstacle_radius + cfg.cube_half:
                failure = "collision"
            executed_p.append(p)
            executed_r.append(rotvecs[min(i, len(rotvecs) - 1)])
            if failure:
                break
            i += 1

        final_cube = Pose.of([*cube, cfg.cube_start[2]])
        executed_p = np.asarray(executed_p)
        executed_r = np.asarray(executed_r)
        if failure:
            return EpisodeOutcome(False, failure, executed_p, executed_r, final_cube)
        reached = np.linalg.norm(cube - np.asarray(cfg.cube_goal)) <= cfg.goal_tolerance
        return EpisodeOutcome(reached, "none" if reached else "goal_missed",
                              executed_p, executed_r, final_cube)


class BarRemovalEnv(TaskEnv):
    """Grasp one of two bars on the conveyor and lift it clear."""

    kind = "bmt"

    def demonstration(self):
        return demo_mod.lift_carry_demo()

    def _sample_offset(self, rng, max_offset):
        # the bar only moves along the conveyor width (y axis)
        return np.array([0.0, rng.uniform(-max_offset, max_offset)])

    def _make_tc(self, offset, seed):
        cfg = self.config
        bar = np.asarray(cfg.bar_center) + np.array([offset[0], offset[1], 0.0])
        grasp = bar + np.array([0.0, 0.0, cfg.grasp_point_lift])
        grasp_rot = np.array([0.0, 0.0, 0.05])
        observations = (
            Observation("start", np.array([0.50, -0.20, 0.25])),
            Observation("contact", grasp, grasp_rot.copy()),
            Observation("goal", np.asarray(cfg.carry_goal), np.zeros(3)),
        )
        return TaskConfiguration(
            env_kind=self.kind,
            start_pose=Pose.of([0.50, -0.20, 0.25]),
            object_pose=Pose.of(bar, grasp_rot),
            goal_pose=Pose.of(cfg.carry_goal),
            offset=np.asarray(offset, dtype=float),
            observations=observations,
            seed=seed,
        )

    def _run(self, positions, rotvecs, tc, replan):
        cfg = self.config
        bar = tc.object_pose.position.copy()
        other = np.asarray(cfg.second_bar_center)
        bar_half = np.asarray(cfg.bar_half)
        inflated = bar_half + cfg.bar_margin
        grasp_center = bar + np.array([0.0, 0.0, cfg.grasp_point_lift])
        grasped = False
        grasp_offset = None
        cleared = False
        failure = None
        for i in range(1, len(positions)):
            p = positions[i]
            r = rotvecs[min(i, len(rotvecs) - 1)]
            if p[2] < 0:
                failure = "collision"
                break
            if not grasped:
                if _in_box(p, grasp_center, cfg.grasp_half):
                    if _tool_down_angle(r) <= cfg.alignment_limit_deg:
                        grasped = True
                        grasp_offset = bar - p
                elif _in_box(p, bar, bar_half):
                    failure = "collision"  # crashed into the target bar outside the grasp
                    break
                if _in_box(p, other, inflated):
                    failure = "collision"
                    break
            else:
                bar = p + grasp_offset
                if _boxes_overlap(bar, bar_half, other, inflated):
                    failure = "collision"
                    break
                if p[2] >= cfg.clearance_height:
                    cleared = True
        final_bar = Pose.of(bar)
        if failure:
            return EpisodeOutcome(False, failure, positions, rotvecs, final_bar)
        success = grasped and cleared
        return EpisodeOutcome(success, "none" if success else "goal_missed",
                              positions, rotvecs, final_bar)


def get_env(env_kind, config=None):
    if env_kind == "dot":
        return DrawerEnv(config)
    if env_kind == "s-cpt":
        return CubePushEnv(config, dynamic=False)
    if env_kind == "d-cpt":
        return CubePushEnv(config, dynamic=True)
    if env_kind == "bmt":
        return BarRemovalEnv(config)
    raise ValueError(f"unknown env kind {env_kind!r}; expected one of {ENV_KINDS}")


def sample_tc(env_kind, rng, max_offset=None, config=None):
    return get_env(env_kind, config).sample_tc(rng, max_offset)


def rollout(env_kind, trajectory, tc, replan=None, config=None):
    return get_env(env_kind, config).rollout(trajectory, tc, replan)


def rollout_skill(env_kind, skill_model, tc, replan=None, config=None, n_steps=None):
    """Sample the skill on the rollout grid and execute it."""
    env = get_env(env_kind, config)
    n = n_steps or env.config.n_steps
    return env.rollout(sample_skill(skill_model, n), tc, replan)
