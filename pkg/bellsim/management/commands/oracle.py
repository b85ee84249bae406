from django.core.management.base import CommandError

from bellsim.exceptions import TruncationError
from bellsim.fock import DEFAULT_CUTOFF
from bellsim.scenarios import ORACLE_TOLERANCE, SCENARIOS, run_scenario

from ._common import BellsimCommand


class Command(BellsimCommand):
    help = 'Compare the analytic click model with the Fock-space oracle on a built-in scenario'
    name = 'oracle'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help=f'One of: {", ".join(sorted(SCENARIOS))}')
        parser.add_argument('--cutoff', type=int, default=DEFAULT_CUTOFF, help='Photon-number cutoff per mode')
        parser.add_argument('--mu', type=float, help='Mean photon number (random: the upper limit)')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the random scenario sweep')
        parser.add_argument('--tolerance', type=float, default=ORACLE_TOLERANCE)

    def run(self, *args, **options):
        name = options['scenario']
        try:
            result = run_scenario(name, options['cutoff'], options.get('mu'), options['seed'], options['tolerance'])
        except TruncationError as exc:
            self.stdout.write(self.style.ERROR(f'{name}: FAIL ({exc})'))
            raise

        verbose = options.get('verbosity', 1) > 1 or len(result.comparisons) <= 16
        if verbose:
            for c in result.comparisons:
                self.stdout.write(f'{c.label:<44} psi-={c.psi_minus:.6f} psi+={c.psi_plus:.6f} |diff|={c.discrepancy:.2e}')
        summary = f'{name}: max |analytic - oracle| = {result.max_discrepancy:.3e} over {len(result.comparisons)} cases'
        if result.passed:
            self.stdout.write(self.style.SUCCESS(f'{summary}: PASS at {result.tolerance:g}'))
            return
        self.stdout.write(self.style.ERROR(f'{summary}: FAIL at {result.tolerance:g}'))
        raise CommandError(f'{name}: oracle discrepancy above {result.tolerance:g}', returncode=4)
