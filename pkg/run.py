"""Application entry point."""
# Import the os module to access environment variables
import os

from flask.cli import FlaskGroup

# Import the create_app factory function from the package
from toric_legendrian import create_app

# Get the environment name from the TORIC_ENV environment variable
config_name = os.environ.get('TORIC_ENV', 'development')


def _make_app():
    return create_app(config_name)


# FlaskGroup exposes the commands registered on app.cli (validate, ypq, pipeline)
cli = FlaskGroup(create_app=_make_app, add_default_commands=False,
                 add_version_option=False, load_dotenv=False)

if __name__ == '__main__':
    cli()
