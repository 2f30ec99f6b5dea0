#!/usr/bin/env python3
"""
时序计划验证与时间自动机编码工具

子命令:
    validate   - 验证计划，输出违规条款
    encode     - 把规划问题编码为时间自动机网络
    witness    - 由有效计划构造见证运行并重放
    check-run  - 用网络重放运行轨迹
    explore    - 有界搜索到达 goal_M 的运行
    serve      - 启动 HTTP API 服务

使用方法:
    python main.py validate --problem ex.json --plan fig4.plan --epsilon 0
    python main.py encode --problem ex.json --out build/ [--format checker-compat]
    python main.py witness --problem ex.json --plan fig4.plan --out build/
    python main.py check-run --network build/network.json --run build/run.json
    python main.py explore --problem tiny.json --max-steps 12 --grid 0,1,2 --out build/

退出码:
    0 成功/有效, 1 计划无效或重放失败, 2 预算内未找到, 64 输入格式错误, 65 语义解析错误
"""

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import List, Optional

from config import config
from src.automata.errors import NetworkError
from src.automata.io import dump_json, load_network, load_run, run_to_dict
from src.automata.semantics import ef_goal, run_check
from src.planning.errors import ParseError, ProblemError, ResolutionError
from src.planning.io import load_plan, load_problem
from src.planning.semantics import validate_plan
from src.services.encoder import (
    GOAL_M,
    ExportFormat,
    OwnClockPolicy,
    encode,
    export_network,
    symbols_to_dict,
)
from src.services.explorer import SearchBudget, bounded_reach, default_grid
from src.services.http import HTTPServer
from src.services.witness import WitnessError, build_witness, timeline
from src.utils.rationals import parse_rational

# 根据配置设置日志级别
log_level = logging.DEBUG if config.DEBUG else logging.INFO

# 日志配置
logging.basicConfig(
    level=log_level,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_FOUND = 2
EXIT_PARSE = 64
EXIT_RESOLUTION = 65


class CliParser(argparse.ArgumentParser):
    """参数错误按输入格式错误退出 (64)，不与"预算内未找到"的 2 混淆"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: 错误: {message}\n")


def _epsilon(args) -> Fraction:
    value = args.epsilon if args.epsilon is not None else config.EPSILON
    try:
        epsilon = parse_rational(value)
    except ValueError as e:
        raise ParseError(f"--epsilon 无效: {e}", source="--epsilon") from e
    if epsilon < 0:
        raise ParseError(f"--epsilon 不能为负: {value}", source="--epsilon")
    return epsilon


def _grid(text: str) -> List[Fraction]:
    try:
        return [parse_rational(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ParseError(f"--grid 无效: {e}", source="--grid") from e


def _write(out: str, name: str, content) -> str:
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, name)
    mode = "wb" if isinstance(content, bytes) else "w"
    with open(path, mode, **({} if mode == "wb" else {"encoding": "utf-8"})) as f:
        f.write(content)
    return path


def _encode(args, problem, epsilon):
    strict = args.strict_ee_guard or config.STRICT_EE_GUARD
    policy = OwnClockPolicy(args.own_clock_policy or config.OWN_CLOCK_POLICY)
    return encode(problem, epsilon, strict, policy)


# ============================================================
# 子命令
# ============================================================

def cmd_validate(args) -> int:
    problem = load_problem(args.problem)
    plan = load_plan(args.plan)
    verdict = validate_plan(problem, plan, _epsilon(args))

    print("Valid" if verdict else "Invalid")
    for diagnostic in sorted(verdict.diagnostics, key=lambda d: (d.time is not None, d.time or 0, d.clause)):
        print(f"  {diagnostic.format()}")
    print(f"no_self_overlap: {'true' if verdict.no_self_overlap else 'false'}")

    if not verdict:
        logger.warning(f"计划无效: {verdict.first.format()}")
        return EXIT_INVALID
    return EXIT_OK


def cmd_encode(args) -> int:
    problem = load_problem(args.problem)
    enc = _encode(args, problem, _epsilon(args))
    exported = export_network(enc, ExportFormat(args.format))

    if not args.out:
        sys.stdout.write(exported.decode("utf-8"))
        return EXIT_OK
    network_path = _write(args.out, "network.json", exported)
    symbols_path = _write(args.out, "symbols.json", dump_json(symbols_to_dict(enc)))
    print(f"网络已写入: {network_path}")
    print(f"符号表已写入: {symbols_path}")
    return EXIT_OK


def cmd_witness(args) -> int:
    problem = load_problem(args.problem)
    plan = load_plan(args.plan)
    epsilon = _epsilon(args)
    enc = _encode(args, problem, epsilon)

    try:
        run = build_witness(enc, problem, plan, epsilon)
    except WitnessError as e:
        print(f"无法构造见证运行: {e}")
        logger.warning(f"见证构造失败: {e}")
        return EXIT_INVALID

    replay = run_check(enc.network, run)
    reached = ef_goal(run, enc.accepting)
    lines = timeline(enc, run)

    if args.out:
        _write(args.out, "network.json", export_network(enc, ExportFormat.INTERNAL))
        _write(args.out, "symbols.json", dump_json(symbols_to_dict(enc)))
        _write(args.out, "run.json", dump_json(run_to_dict(run)))
        _write(args.out, "timeline.txt", "\n".join(lines) + "\n")
        print(f"见证运行已写入: {args.out}")
    else:
        print("\n".join(lines))

    print(f"{len(run)} 步, 重放{'通过' if replay else '失败'}, {GOAL_M} {'可达' if reached else '不可达'}")
    return EXIT_OK if replay and reached else EXIT_INVALID


def cmd_check_run(args) -> int:
    net = load_network(args.network)
    run = load_run(args.run)
    replay = run_check(net, run)

    if not replay:
        print(f"Rejected: {replay.reason}")
        logger.warning(f"运行被拒绝: {replay.reason}")
        return EXIT_INVALID

    main_locations = net.automata[0].locations if net.automata else ()
    reached = GOAL_M in main_locations and ef_goal(run, lambda q: q.locations[0] == GOAL_M)
    print(f"Accepted: {replay.steps_replayed} 步")
    print(f"{GOAL_M}: {'reached' if reached else 'not reached'}")
    return EXIT_OK


def cmd_explore(args) -> int:
    problem = load_problem(args.problem)
    epsilon = _epsilon(args)
    enc = _encode(args, problem, epsilon)

    grid = _grid(args.grid) if args.grid else default_grid(problem, epsilon)
    budget = SearchBudget(
        max_internal_steps=args.max_steps or config.EXPLORER_MAX_STEPS,
        delay_grid=tuple(grid),
        max_configs=args.max_configs or config.EXPLORER_MAX_CONFIGS,
    )
    seed = args.seed if args.seed is not None else config.SEED
    workers = args.workers or config.EXPLORER_WORKERS
    result = bounded_reach(enc, budget, seed=seed, workers=workers)

    print(result.describe(budget))
    if not result:
        return EXIT_NOT_FOUND
    if args.out:
        path = _write(args.out, "run.json", dump_json(run_to_dict(result.run)))
        print(f"运行已写入: {path}")
    else:
        sys.stdout.write(dump_json(run_to_dict(result.run)))
    return EXIT_OK


def cmd_serve(args) -> int:
    host = args.host or config.HTTP_API_HOST
    port = args.port or config.HTTP_API_PORT
    print(f"✓ HTTP API: http://{host}:{port}")
    print(f"  - POST /api/validate - 验证计划")
    print(f"  - POST /api/encode   - 编码规划问题")
    print(f"  - POST /api/witness  - 构造见证运行")
    HTTPServer().run(host, port)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "encode": cmd_encode,
    "witness": cmd_witness,
    "check-run": cmd_check_run,
    "explore": cmd_explore,
    "serve": cmd_serve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        description="时序计划验证、时间自动机编码与见证运行",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--debug", action="store_true", help="输出调试日志")
    subparsers = parser.add_subparsers(dest="command", help="子命令")

    def with_problem(p, plan: bool = False):
        p.add_argument("--problem", required=True, help="问题文件 (JSON)")
        if plan:
            p.add_argument("--plan", required=True, help="计划文件 (文本)")
        p.add_argument("--epsilon", help=f"互斥间隔 ε，如 0 或 1/2 (默认: {config.EPSILON})")

    def with_encoder(p):
        p.add_argument("--strict-paper-ee-guard", "--strict-ee-guard", dest="strict_ee_guard",
                       action="store_true", help="ee 迁移的互斥守卫按开始瞬时动作生成")
        p.add_argument("--own-clock-policy", choices=[x.value for x in OwnClockPolicy], help="互斥守卫排除自身时钟的方式")

    # validate 子命令
    validate_parser = subparsers.add_parser("validate", help="验证计划")
    with_problem(validate_parser, plan=True)

    # encode 子命令
    encode_parser = subparsers.add_parser("encode", help="编码规划问题")
    with_problem(encode_parser)
    with_encoder(encode_parser)
    encode_parser.add_argument("--out", "-o", help="输出目录，写入 network.json 和 symbols.json")
    encode_parser.add_argument("--format", choices=[x.value for x in ExportFormat], default="internal", help="导出格式")

    # witness 子命令
    witness_parser = subparsers.add_parser("witness", help="构造见证运行")
    with_problem(witness_parser, plan=True)
    with_encoder(witness_parser)
    witness_parser.add_argument("--out", "-o", help="输出目录，写入 network.json、symbols.json、run.json、timeline.txt")

    # check-run 子命令
    check_parser = subparsers.add_parser("check-run", help="重放运行轨迹")
    check_parser.add_argument("--network", required=True, help="网络文件 (JSON)")
    check_parser.add_argument("--run", required=True, help="运行轨迹文件 (JSON)")

    # explore 子命令
    explore_parser = subparsers.add_parser("explore", help="有界搜索目标运行")
    with_problem(explore_parser)
    with_encoder(explore_parser)
    explore_parser.add_argument("--out", "-o", help="输出目录，写入 run.json")
    explore_parser.add_argument("--max-steps", type=int, help=f"内部迁移上限 (默认: {config.EXPLORER_MAX_STEPS})")
    explore_parser.add_argument("--max-configs", type=int, help=f"访问配置上限 (默认: {config.EXPLORER_MAX_CONFIGS})")
    explore_parser.add_argument("--grid", help="延迟网格，逗号分隔，如 0,1/2,1")
    explore_parser.add_argument("--seed", type=int, help=f"随机种子 (默认: {config.SEED})")
    explore_parser.add_argument("--workers", type=int, help=f"并行线程数 (默认: {config.EXPLORER_WORKERS})")

    # serve 子命令
    serve_parser = subparsers.add_parser("serve", help="启动 HTTP API 服务")
    serve_parser.add_argument("--host", help=f"监听地址 (默认: {config.HTTP_API_HOST})")
    serve_parser.add_argument("--port", type=int, help=f"监听端口 (默认: {config.HTTP_API_PORT})")

    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help 为 0，其余参数错误已由 CliParser 映射为 64
        return EXIT_OK if not e.code else EXIT_PARSE
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)

    handler = COMMANDS.get(args.command)
    if handler is None:
        parser.print_help(sys.stderr)
        return EXIT_PARSE

    try:
        return handler(args)
    except ParseError as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"错误: 无法读取输入: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"错误: 参数无效: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (ResolutionError, ProblemError, NetworkError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_RESOLUTION
    except Exception as e:
        logger.error(f"执行失败: {e}", exc_info=True)
        return EXIT_INVALID


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
