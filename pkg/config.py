"""
时序计划验证与时间自动机编码工具配置 - 使用 Pydantic Settings
支持从环境变量和 .env 读取配置，命令行参数可覆盖单次调用
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    """配置类 - 自动从环境变量读取"""

    # 互斥瞬时动作的最小间隔 ε（有理数字符串，如 "0"、"1/2"）
    EPSILON: str = "0"

    # 调试模式（输出每一步迁移和每一层搜索）
    DEBUG: bool = False

    # 编码变体
    STRICT_EE_GUARD: bool = False  # ee 迁移的互斥守卫按开始瞬时动作生成
    OWN_CLOCK_POLICY: str = "snap"       # snap: 只排除当前瞬时动作的时钟; action: 排除所属动作的两个时钟

    # 有界搜索
    SEED: int = 0
    EXPLORER_MAX_STEPS: int = 24
    EXPLORER_MAX_CONFIGS: int = 5000
    EXPLORER_WORKERS: int = 1

    # HTTP API 服务配置
    HTTP_API_HOST: str = "0.0.0.0"
    HTTP_API_PORT: int = 8000
    HTTP_API_TOKEN: str = ""  # Bearer Token 认证，为空则不启用认证

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


# 创建全局配置实例
config = Config()
