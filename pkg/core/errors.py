"""
领域异常定义 - 所有数值模块共享的错误类型
"""


class WaveCrestError(Exception):
    """本项目所有异常的基类"""


class InvalidConfig(WaveCrestError, ValueError):
    """配置参数不满足约束"""


class InvalidInput(WaveCrestError, ValueError):
    """输入参数超出允许范围"""


class InvalidRange(InvalidInput):
    """积分区间为空或方向错误"""


class InvalidDecay(InvalidInput):
    """尾部衰减阶数不足以保证可积"""


class DomainError(InvalidInput):
    """在函数的奇点处求值"""


class NotHighest(InvalidInput):
    """波峰与最大高度的间隙过大，重标度无意义"""


class WindowTooSmall(InvalidInput):
    """拟合窗口内的样本数不足"""


class NonConvergent(WaveCrestError, ArithmeticError):
    """自适应求积在最大细分深度内未达到容差"""


class NoConvergence(WaveCrestError, ArithmeticError):
    """Newton 迭代未收敛"""


class SingularJacobian(NoConvergence):
    """Newton 迭代中 Jacobian 奇异"""


class BranchStalled(WaveCrestError, ArithmeticError):
    """延拓步长降到下限仍未到达最高波"""
