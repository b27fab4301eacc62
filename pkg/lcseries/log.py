import os
from tqdm import tqdm


def create_logger(log_filename=None, display=True):
    '''
    returns (log, logclose); log(text) echoes to the console and appends to
    log_filename when one is given
    '''
    f = None
    if log_filename is not None:
        os.makedirs(os.path.dirname(os.path.abspath(log_filename)), exist_ok=True)
        f = open(log_filename, 'a')
    counter = [0]

    def logger(text=''):
        text = str(text)
        if display:
            # tqdm.write keeps active progress bars intact
            tqdm.write(text)
        if f is not None:
            f.write(text + '\n')
            counter[0] += 1
            if counter[0] % 10 == 0:
                f.flush()
                os.fsync(f.fileno())

    def logclose():
        if f is not None and not f.closed:
            f.close()

    return logger, logclose


def silent(text=''):
    pass
