# 时序计划验证与时间自动机编码 - 源码包
