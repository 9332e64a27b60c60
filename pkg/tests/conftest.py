import pytest

from faultbench import faults
from faultbench.scenario import (ClockConfig, ControlConfig, DmpConfig,
                                 MonitorConfig, ScenarioConfig, data_path,
                                 load_scenario)
from faultbench.plant import default_joint_params


def make_scenario(joints=("right_knee",), injectors=(), demo="demo_minimal.csv",
                  t_end=7.0, dt=1e-3, seed=0, kp=200.0, kd=20.0,
                  monitored=None) -> ScenarioConfig:
    """Programmatic scenario for tests, bypassing the JSON layer."""
    return ScenarioConfig(
        clock=ClockConfig(dt_s=dt, t_end_s=t_end),
        joints=tuple(default_joint_params(n) for n in joints),
        dmp=DmpConfig(),
        control=ControlConfig(kp=kp, kd=kd),
        injectors=tuple(injectors),
        monitors=MonitorConfig(signals=monitored),
        seed=seed,
        demo_path=str(data_path(demo)),
    )


def stuck_spec(name="stuck", target="plant.right_knee.pos", p=0.0005,
               duration=0.25, chain_to=None, enabled=True) -> faults.FaultSpec:
    return faults.FaultSpec(
        name=name, target_signal=target, fault_type=faults.StuckAt(),
        event=faults.FailureProbability(p=p),
        effect=faults.ConstantTime(duration=duration),
        enabled=enabled, chain_to=chain_to,
    )


@pytest.fixture(scope="session")
def case_study_cfg():
    return load_scenario(data_path("case_study.json"))


@pytest.fixture(scope="session")
def minimal_cfg():
    return load_scenario(data_path("minimal.json"))
