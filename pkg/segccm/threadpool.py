"""
Bounded worker pool for independent jobs (bench rows, sweep cells).

Inspired by http://stackoverflow.com/a/7257510
"""

import logging
from queue import Queue
from threading import Thread

logger = logging.getLogger(__name__)

# queued once per worker to make it return
STOP = None


class Worker(Thread):
    """ Thread executing tasks from a given tasks queue until it gets STOP """

    def __init__(self, tasks):
        Thread.__init__(self)
        self.tasks = tasks
        self.daemon = True
        self.start()

    def run(self):
        while True:
            task = self.tasks.get()
            if task is STOP:
                self.tasks.task_done()
                return
            func, args, kargs, slot = task
            try:
                result = func(*args, **kargs)
                if slot is not None:
                    slot.append((True, result))
            except Exception as e:
                logger.error("Task %s failed: %s" % (getattr(func, "__name__", func), e))
                if slot is not None:
                    slot.append((False, e))
            finally:
                self.tasks.task_done()


class ThreadPool:
    """ Pool of threads consuming tasks from a queue """

    def __init__(self, num_threads):
        if num_threads < 1:
            raise ValueError("A pool needs at least one thread")
        self.tasks = Queue(num_threads)
        self.workers = [Worker(self.tasks) for _ in range(num_threads)]

    def add_task(self, func, *args, **kargs):
        """ Add a task to the queue; returns the slot its outcome lands in """
        slot = []
        self.tasks.put((func, args, kargs, slot))
        return slot

    def map(self, func, args_list):
        """
        Run func over args_list and return the results in input order.

        The first exception raised by any task is re-raised after all
        tasks have finished. The workers exit afterwards, so a pool
        serves a single map.
        """
        try:
            slots = [self.add_task(func, args) for args in args_list]
            self.wait_completion()
        finally:
            self.close()
        results = []
        for slot in slots:
            ok, value = slot[0]
            if not ok:
                raise value
            results.append(value)
        return results

    def wait_completion(self):
        """ Wait for completion of all the tasks in the queue """
        self.tasks.join()

    def close(self):
        """ Stop every worker and wait for its thread to end """
        for _ in self.workers:
            self.tasks.put(STOP)
        for worker in self.workers:
            worker.join()
        logger.debug("Pool of %s workers closed" % len(self.workers))


def run_jobs(func, args_list, num_threads=1):
    """ map() on a pool, or in the calling thread when num_threads is 1 """
    args_list = list(args_list)
    if num_threads <= 1 or len(args_list) <= 1:
        return [func(args) for args in args_list]
    return ThreadPool(min(num_threads, len(args_list))).map(func, args_list)
