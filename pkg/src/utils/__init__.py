# 工具模块: 有理数, 随机实例生成
