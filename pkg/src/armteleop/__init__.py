"""Human-arm to robot-arm teleoperation toolkit.

Maps tracked shoulder/elbow/wrist poses to the seven joints of an
FR3-class arm, drives a simulated robot through a rate-limited trajectory
controller, streams the result over TCP/WebSocket, and benchmarks
operators on ring-reaching and posture-matching tasks.
"""

from .capture import minimum_jerk, parse_frames, resample_frames, write_frames
from .config import ToolkitConfig, default_config, load_config
from .controller import ControllerConfig, ControllerState, controller_step, resample_commands
from .kinematics import (
    HumanArmModel,
    JointLimits,
    KinematicChain,
    clamp_to_limits,
    default_limits,
    forward_kinematics,
    fr3_chain,
    human_arm_fk,
    robot_elbow_wrist,
)
from .quat import swing_twist
from .retarget import (
    JointFlag,
    JointVector,
    RetargetConfig,
    SkeletonFrame,
    calibrate_joints,
    retarget_frame,
    segment_vectors,
)
from .scripted import OperatorSettings, Pipeline, scripted_operator
from .service import Session, run_message_log
from .tasks import (
    MetricsSummary,
    PostureTaskSpec,
    RingTaskSpec,
    TrialLog,
    latin_square,
    posture_match_test,
    ring_sequence,
    ring_target_positions,
    selection_test,
    summarize,
)

__version__ = "0.1.0"
