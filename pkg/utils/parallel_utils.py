"""
并行工具集 - 独立样本的有序并行求值
"""
import logging
from typing import Any, Callable, Iterable, List, Optional

from joblib import Parallel, delayed
from tqdm import tqdm

logger = logging.getLogger(__name__)


def parallel_map(
    func: Callable[..., Any],
    items: Iterable[Any],
    n_jobs: int = 1,
    desc: Optional[str] = None,
    progress: bool = False,
) -> List[Any]:
    """
    对 items 逐个调用 func，结果按输入顺序返回

    Args:
        func: 单参数函数，n_jobs > 1 时必须可被 cloudpickle 序列化
        items: 输入序列
        n_jobs: 并行进程数；1 表示在当前进程内顺序执行
        desc: 进度条标题
        progress: 是否显示 tqdm 进度条

    Returns:
        与 items 等长、同序的结果列表
    """
    items = list(items)
    if not items:
        return []
    iterator = tqdm(items, desc=desc, disable=not progress, leave=False)
    if n_jobs == 1:
        return [func(item) for item in iterator]

    logger.debug(f"并行求值 {len(items)} 个样本 (n_jobs={n_jobs})")
    return Parallel(n_jobs=n_jobs)(delayed(func)(item) for item in iterator)
