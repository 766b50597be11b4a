import logging
import logging.config
import os

from app.dependencies import get_settings


def setup_logging():
    """
    Sets up logging for the laboratory using a configuration file.
    This ensures standardized logging across every pipeline.
    """
    settings = get_settings()
    logging_config_path = settings.log_config_path
    if not os.path.isabs(logging_config_path):
        # Resolve against the project root, two levels above this file.
        logging_config_path = os.path.join(os.path.dirname(__file__), '..', '..', logging_config_path)
    normalized_path = os.path.normpath(logging_config_path)
    if os.path.exists(normalized_path):
        logging.config.fileConfig(normalized_path, disable_existing_loggers=False)
    else:
        logging.basicConfig(level=logging.INFO)
        logging.getLogger(__name__).warning(f"Logging config {normalized_path} not found, using basicConfig")
    if settings.debug:
        logging.getLogger().setLevel(logging.DEBUG)
