class ResourceError(RuntimeError):
    '''a computation would exceed its memory, disk or size budget'''


class PrecisionError(RuntimeError):

    def __init__(self, message, required_order=None, bits=None):
        super().__init__(message)
        self.required_order = required_order
        self.bits = bits


class QuadratureError(RuntimeError):
    pass


class BranchError(RuntimeError):
    '''the argument of f cannot be tracked continuously on the requested grid'''


class IdentityError(RuntimeError):
    '''an exact identity failed: this is an arithmetic bug, never a finding'''


class InsufficientDataError(RuntimeError):
    pass


class SeriesFormatError(ValueError):

    def __init__(self, path, line_number, message):
        super().__init__(f'{path}:{line_number}: {message}')
        self.path = path
        self.line_number = line_number


class DomainError(ValueError):
    pass


class CertificateError(ValueError):

    def __init__(self, message, first_offending=None):
        super().__init__(message)
        self.first_offending = first_offending


class UsageError(ValueError):
    pass
