import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Base configuration for the pressurelab toolkit"""
    LOG_LEVEL = os.getenv('PRESSURELAB_LOG_LEVEL', 'INFO')

    # Worker pool and output
    THREADS = int(os.getenv('PRESSURELAB_THREADS', 1))
    OUTPUT_DIR = os.getenv('PRESSURELAB_OUT', 'results')
    FLOAT_FORMAT = '%.12g'  # 12 significant digits in result tables

    # Cover-tree depth cap D per alphabet size
    DEPTH_CAP = {2: 16, 3: 10, 4: 8}

    # ExperimentConfig caps
    MAX_EXHAUSTIVE_N = int(os.getenv('PRESSURELAB_MAX_EXHAUSTIVE_N', 24))
    MAX_ORBIT_LENGTH = int(os.getenv('PRESSURELAB_MAX_ORBIT_LENGTH', 10**6))

    # Numerical tolerances
    PROB_TOL = 1e-12
    POWER_ITER_TOL = float(os.getenv('PRESSURELAB_POWER_ITER_TOL', 1e-12))
    POWER_ITER_MAX = int(os.getenv('PRESSURELAB_POWER_ITER_MAX', 100000))
    JUMP_TOL = float(os.getenv('PRESSURELAB_JUMP_TOL', 1e-6))
    ROOT_TOL = float(os.getenv('PRESSURELAB_ROOT_TOL', 1e-9))
    VOLUME_TOL = 1e-12


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    TESTING = False
    LOG_LEVEL = os.getenv('PRESSURELAB_LOG_LEVEL', 'DEBUG')


class TestingConfig(Config):
    """Testing configuration"""
    DEBUG = True
    TESTING = True
    THREADS = 1
    OUTPUT_DIR = os.getenv('PRESSURELAB_OUT', 'test-results')


class ProductionConfig(Config):
    """Production configuration for long batch runs"""
    DEBUG = False
    TESTING = False


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}


def get_config():
    """Get the current configuration based on environment"""
    env = os.getenv('PRESSURELAB_ENV', 'development')
    return config.get(env, config['default'])
