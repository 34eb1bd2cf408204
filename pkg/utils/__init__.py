# 工具：外推拟合、输出路径、并行求值与结果表格
