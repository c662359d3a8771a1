import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from rom.config import RunConfig
from rom.exceptions import OpInfError, OverParameterizedError
from rom.matrixio import load_matrix

logger = logging.getLogger('rom.commands')

EXIT_ERROR = 1
EXIT_MISSING_PATH = 2
EXIT_OVERPARAMETERIZED = 3


class OpInfCommand(BaseCommand):
    """Shared flags and error reporting for the pipeline subcommands."""
    stage = 'opinf'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='RunConfig file (key = value lines)')
        parser.add_argument('--seed', type=int, help='Random seed (overrides the config)')
        parser.add_argument('--out', help='Output directory (overrides the config)')
        parser.add_argument('--threads', type=int, help='Grid-search worker threads (overrides the config)')

    def handle(self, *args, **options):
        try:
            config_path = options.get('config')
            if config_path and not Path(config_path).is_file():
                raise FileNotFoundError(2, 'No such file', config_path)
            config = RunConfig.from_file(
                config_path, seed=options.get('seed'), out=options.get('out'), threads=options.get('threads'),
            )
            out = Path(config.out)
            out.mkdir(parents=True, exist_ok=True)
            message = self.run(config, out, options)
        except OverParameterizedError as exc:
            raise CommandError(f"{self.stage}: {exc}", returncode=EXIT_OVERPARAMETERIZED)
        except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
            raise CommandError(
                f"{self.stage}: cannot read '{exc.filename}': {exc.strerror}", returncode=EXIT_MISSING_PATH,
            )
        except ValidationError as exc:
            raise CommandError(f"{self.stage}: invalid artifact or configuration: {exc.detail}", returncode=EXIT_ERROR)
        except (OpInfError, ValueError) as exc:
            raise CommandError(f"{self.stage}: {exc}", returncode=EXIT_ERROR)
        self.stdout.write(self.style.SUCCESS(message))

    def run(self, config, out, options):
        raise NotImplementedError

    def load(self, path):
        if not Path(path).is_file():
            raise FileNotFoundError(2, 'No such file', str(path))
        return load_matrix(path)
