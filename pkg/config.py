"""Configuration settings for different environments."""
# Import os module to access environment variables
import os
# Import load_dotenv to read variables from .env file
from dotenv import load_dotenv

# Load environment variables from the .env file into os.environ
load_dotenv()


class Config:
    """Base configuration class with common settings."""
    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    # Worker threads for the sampler; never changes results
    WORKERS = int(os.environ.get('TORIC_WORKERS', 1))

    # Pipeline defaults
    DEFAULT_SEED = int(os.environ.get('TORIC_SEED', 7))
    DEFAULT_SAMPLES = int(os.environ.get('TORIC_SAMPLES', 500))

    # Hit-and-run sampler
    SAMPLER_CHAINS = int(os.environ.get('SAMPLER_CHAINS', 4))
    SAMPLER_BURN_IN = int(os.environ.get('SAMPLER_BURN_IN', 100))
    SAMPLER_THIN = int(os.environ.get('SAMPLER_THIN', 5))

    # Volume minimizer
    MINIMIZER_TOL = float(os.environ.get('MINIMIZER_TOL', 1e-9))
    MINIMIZER_MAX_ITER = int(os.environ.get('MINIMIZER_MAX_ITER', 10000))
    MINIMIZER_LOG_EVERY = int(os.environ.get('MINIMIZER_LOG_EVERY', 100))

    # Verification tolerances
    RESIDUAL_TOL = float(os.environ.get('RESIDUAL_TOL', 1e-10))
    PAIRING_TOL = float(os.environ.get('PAIRING_TOL', 1e-9))
    CALIBRATION_TOL = float(os.environ.get('CALIBRATION_TOL', 1e-9))

    # Face enumeration is exponential in the number of normals
    MAX_NORMALS = int(os.environ.get('MAX_NORMALS', 16))


class DevelopmentConfig(Config):
    """Development environment configuration."""
    DEBUG = True
    TESTING = False


class TestingConfig(Config):
    """Testing environment configuration."""
    DEBUG = False
    TESTING = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'WARNING')
    # Small runs keep the CLI tests fast
    DEFAULT_SAMPLES = 100
    SAMPLER_BURN_IN = 50


class ProductionConfig(Config):
    """Production environment configuration."""
    DEBUG = False
    TESTING = False


# Configuration dictionary mapping environment names to configuration classes
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
