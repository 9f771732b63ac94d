"""Queue walkthrough: the robot has a desk as its goal and three people are already in line.

The weighted-sum planner drives straight to the desk and cuts past the
line. The context-aware planner classifies the scene as queue waiting,
fits a line through the people and goes to the spot one spacing behind
the last person.

    python3 demos/queue_join.py
"""
from socialnav.scenario import load_scenario
from socialnav.sim import reference_social_goal, run_scenario


def main():
    cfg = load_scenario("queue_join")
    tail = reference_social_goal(cfg).pose
    print(f"desk goal ({cfg.goal.x:.2f}, {cfg.goal.y:.2f}), queue tail ({tail.x:.2f}, {tail.y:.2f})")
    for mode in ("traditional", "paccet"):
        log, m = run_scenario(cfg, mode)
        x, y, _ = log.records[-1].pose
        print(f"{mode:>12}: ends at ({x:.2f}, {y:.2f}) after {m.steps} steps, "
              f"{m.proxemic_intrusions} steps inside 1.2 m, {m.intimate_intrusions} inside 0.45 m")


if __name__ == "__main__":
    main()
