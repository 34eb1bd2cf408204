import logging
from typing import Any, Dict, Optional

from config import RunConfig, get_config, init_logging
from orchestrator import ExperimentOrchestrator
from utils.path_manager import PathManager

logger = logging.getLogger(__name__)


def initialize_services(config: RunConfig) -> Dict[str, Any]:
    """
    构建本次运行的服务字典：配置、输出路径与编排器
    """
    try:
        services: Dict[str, Any] = {
            "config": config,
            "path_manager": PathManager(config.output_dir),
        }
        services["orchestrator"] = ExperimentOrchestrator(services)
        logger.info(f"成功初始化 {len(services)} 个服务")
        return services
    except Exception as e:
        logger.critical(f"服务初始化失败: {e}", exc_info=True)
        raise


def create_services(config: Optional[RunConfig] = None) -> Dict[str, Any]:
    """
    初始化日志、记录完整配置并返回服务字典
    """
    config = config or get_config()
    init_logging(config.log_level, config.output_dir / "logs")
    logger.info("配置和日志初始化完成")
    for key, value in config.to_dict().items():
        logger.info(f"  {key} = {value}")
    return initialize_services(config)


def cleanup_services(services: Dict[str, Any]):
    """
    调用各服务的 cleanup/close/shutdown（若存在）
    """
    cleanup_methods = ["cleanup", "close", "shutdown"]

    for service_name, service_instance in services.items():
        for method_name in cleanup_methods:
            method = getattr(service_instance, method_name, None)
            if callable(method):
                try:
                    method()
                    logger.debug(f"服务 {service_name} 清理完成")
                except Exception as e:
                    logger.warning(f"服务 {service_name} 清理失败: {e}")
                break

    logger.info("服务清理完成")
