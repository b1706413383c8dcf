"""The basic asynchronous access loop.

An aload is issued against far memory and returns a request id immediately;
the core keeps doing useful work while polling getfin, and only touches the
scratchpad once the id comes back. Compare with a synchronous load, which
would have stalled the core for the whole round trip.
"""

from amusim import AmuMachine, Constant, Engine, FarMemoryNode, GuestApi

FAR_LATENCY_NS = 5000

machine = AmuMachine()
node = FarMemoryNode(0, 0, 1 << 24, Constant(FAR_LATENCY_NS), 64, 64)
engine = Engine([node], machine, seed=1)

# Something worth fetching: 64 bytes of far memory at 0x2000.
node.backing.write(0x2000, bytes(range(64)))


def guest(ctx):
    api = GuestApi(engine, machine, ctx)
    rid = api.aload(spm_addr=0, mem_addr=0x2000)
    print(f"[{api.now:>6} ns] aload issued, request id {rid} (call did not block)")

    other_work = 0
    while True:
        finished = api.getfin()
        if finished == rid:
            break
        other_work += 1  # model "do something else before the request is finished"
        yield 100

    print(f"[{api.now:>6} ns] getfin returned id {finished} after {other_work} chunks of other work")
    data = api.spm_read(0, 8)
    print(f"[{api.now:>6} ns] scratchpad now holds {data.hex()} (ordinary loads from SPM)")


engine.register_guest(guest, name="basic")
engine.run_to_completion()
print(f"simulated time: {engine.now} ns (round trip was {FAR_LATENCY_NS} ns)")
