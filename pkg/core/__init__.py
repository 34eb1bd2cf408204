# 数值核心：求积、核、特殊函数、求解器、渐近分析与残差校验
