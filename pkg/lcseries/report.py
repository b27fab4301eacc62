'''
Structured pass / fail / reported records emitted by every verification.

"fail" is reserved for exact mathematical statements that were falsified;
empirical constant fits and asymptotic claims are only ever "reported".
'''
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import __version__
from .helpers import fraction_to_str

SCHEMA_VERSION = 1
STATUSES = ('pass', 'fail', 'reported')


def to_text(value):
    '''stringify measured values; exact rationals stay exact'''
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return fraction_to_str(value)
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(value, 30)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): to_text(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_text(v) for v in value]
    return str(value)


@dataclass
class CheckRecord:
    id: str
    status: str
    measured: dict = field(default_factory=dict)
    envelope: str = None
    notes: str = ''

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f'status must be one of {STATUSES}, got {self.status!r}')

    def to_dict(self):
        return {'id': self.id, 'status': self.status, 'measured': to_text(self.measured),
                'envelope': self.envelope, 'notes': self.notes}


@dataclass
class VerificationReport:
    suite: str
    records: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    version: str = __version__
    timing: dict = field(default_factory=dict)

    def add(self, id, status, envelope=None, notes='', **measured):
        record = CheckRecord(id=id, status=status, measured=measured, envelope=envelope, notes=notes)
        self.records.append(record)
        return record

    def extend(self, other):
        self.records.extend(other.records)
        for k, v in other.timing.items():
            self.timing[f'{other.suite}/{k}'] = v
        return self

    def __getitem__(self, id):
        for record in self.records:
            if record.id == id:
                return record
        raise KeyError(id)

    @property
    def ok(self):
        return not self.failures

    @property
    def failures(self):
        return [r for r in self.records if r.status == 'fail']

    def counts(self):
        return {s: sum(r.status == s for r in self.records) for s in STATUSES}

    def to_dict(self, include_timing=True):
        d = {
            'schema_version': SCHEMA_VERSION,
            'suite': self.suite,
            'version': self.version,
            'config': to_text(self.config),
            'counts': self.counts(),
            'records': [r.to_dict() for r in self.records],
        }
        if include_timing:
            d['timing'] = {k: round(v, 3) for k, v in self.timing.items()}
        return d

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)

    def fingerprint(self):
        '''hash of the report without its timing field'''
        return hashlib.sha256(self.to_json(include_timing=False).encode()).hexdigest()

    def write(self, path):
        with open(path, 'w') as f:
            f.write(self.to_json())
            f.write('\n')

    def summary(self):
        c = self.counts()
        return f'{self.suite}: {c["pass"]} pass, {c["fail"]} fail, {c["reported"]} reported'


def read_report(path):
    with open(path) as f:
        return json.load(f)
