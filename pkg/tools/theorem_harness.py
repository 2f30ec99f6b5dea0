#!/usr/bin/env python3
"""
见证运行验收工具 - 随机生成有效计划，构造见证运行并重放

检查项:
    - 编码规模: |vars| = 2|P|+2, |clocks| = 2|A|, 位置 = 3+4|A|, 迁移 = 3+5|A|
    - 见证运行可构造，run_check 通过，且到达 goal_M
    - e2M 之前 aa = 0 且所有 lp = 0

使用方法:
    python tools/theorem_harness.py [--count 200] [--seed 0] [--epsilon 0]

示例:
    python tools/theorem_harness.py --count 500 --seed 7 --epsilon 1/4
"""

import argparse
import os
import random
import sys
import time
from fractions import Fraction
from typing import List

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.automata.models import InternalStep
from src.automata.semantics import ef_goal, run_check
from src.planning.models import PlanningProblem
from src.services.encoder import EncodedNetwork, TransitionKind, encode
from src.services.witness import WitnessError, build_witness
from src.utils.generator import valid_instance
from src.utils.rationals import parse_rational


def size_problems(enc: EncodedNetwork, problem: PlanningProblem) -> List[str]:
    net = enc.network
    n_props, n_actions = len(problem.props), len(problem.actions)
    expected = {
        "vars": (len(net.vars), 2 * n_props + 2),
        "clocks": (len(net.clocks), 2 * n_actions),
        "locations": (net.location_count, 3 + 4 * n_actions),
        "transitions": (net.transition_count, 3 + 5 * n_actions),
    }
    return [f"{name}: {got} ≠ {want}" for name, (got, want) in expected.items() if got != want]


def check_instance(problem: PlanningProblem, plan, epsilon: Fraction) -> List[str]:
    enc = encode(problem, epsilon)
    failures = size_problems(enc, problem)
    try:
        run = build_witness(enc, problem, plan, epsilon)
    except WitnessError as e:
        return failures + [f"见证构造失败: {e}"]

    replay = run_check(enc.network, run)
    if not replay:
        failures.append(f"重放失败: {replay.reason}")
    if not ef_goal(run, enc.accepting):
        failures.append("未到达 goal_M")

    last = run.steps[-1]
    before_goal = run.steps[-2].after if len(run.steps) > 1 else run.initial
    if isinstance(last, InternalStep) and enc.labels[(last.automaton, last.transition)] == TransitionKind.E2M:
        if before_goal.variables[enc.vars.aa] != 0:
            failures.append("e2M 之前 aa ≠ 0")
        if any(before_goal.variables[v] != 0 for v in enc.vars.lp.values()):
            failures.append("e2M 之前存在 lp ≠ 0")
    else:
        failures.append("运行没有以 e2M 结束")
    return failures


def main():
    parser = argparse.ArgumentParser(
        description="见证运行验收工具",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--count", "-n", type=int, default=200, help="实例数量 (默认: 200)")
    parser.add_argument("--seed", "-s", type=int, default=0, help="随机种子 (默认: 0)")
    parser.add_argument("--epsilon", "-e", default="0", help="互斥间隔 ε (默认: 0)")
    parser.add_argument("--max-props", type=int, default=5, help="命题数上限 (默认: 5)")
    parser.add_argument("--max-actions", type=int, default=4, help="动作数上限 (默认: 4)")
    parser.add_argument("--verbose", "-v", action="store_true", help="输出每个失败实例的详情")
    args = parser.parse_args()

    try:
        epsilon = parse_rational(args.epsilon)
    except ValueError as e:
        print(f"错误: 无效的 epsilon: {e}")
        return 64

    rng = random.Random(args.seed)
    started = time.monotonic()
    failed = 0
    total_steps = 0

    print(f"实例数: {args.count}, 种子: {args.seed}, ε = {args.epsilon}")
    print("-" * 40)
    for index in range(args.count):
        problem, plan = valid_instance(rng, args.max_props, args.max_actions, epsilon=epsilon)
        total_steps += len(plan)
        failures = check_instance(problem, plan, epsilon)
        if failures:
            failed += 1
            if args.verbose:
                print(f"[{index}] 失败: {'; '.join(failures)}")

    elapsed = time.monotonic() - started
    print("-" * 40)
    print(f"通过: {args.count - failed}/{args.count}, 计划步骤合计 {total_steps}, 用时 {elapsed:.1f} 秒")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
