"""Live service round trip over a real TCP socket.

Starts the teleoperation server on an ephemeral port, connects a client,
streams a short wave of the virtual arm, and prints the joint states the
service broadcasts back. The browser cockpit speaks the same protocol over
the WebSocket port.

Run:  python3 demos/04_live_service_roundtrip.py
"""

import asyncio
import json
import math

import numpy as np

from armteleop import default_config, human_arm_fk
from armteleop.capture import frame_to_record
from armteleop.server import TeleopServer

cfg = default_config()


async def run():
    server = TeleopServer(cfg, port=0, ws_port=0)
    await server.start()
    print(f"service on tcp://127.0.0.1:{server.port} (ws on {server.ws_port})")

    reader, writer = await asyncio.open_connection("127.0.0.1", server.port)

    async def pump():
        # sweep the elbow while streaming at 60 Hz for a second
        for i in range(60):
            elbow = 2.6 - 1.2 * (0.5 - 0.5 * math.cos(2 * math.pi * i / 60))
            frame = human_arm_fk(cfg.human, [0.2, 0.9, 0.0, elbow, 0.0, 0.3, 0.0])
            msg = {"type": "frame", "seq": i + 1, "data": frame_to_record(frame)}
            writer.write((json.dumps(msg) + "\n").encode())
            await writer.drain()
            await asyncio.sleep(1 / 60)

    async def watch():
        shown = 0
        while shown < 10:
            line = await asyncio.wait_for(reader.readline(), 5.0)
            msg = json.loads(line)
            if msg["type"] == "joint_state":
                theta = np.round(msg["theta"], 2)
                print(f"  t={msg['t']:5.2f}  theta={theta}")
                shown += 1
                await asyncio.sleep(0.1)  # print a sample, not every tick

    await asyncio.gather(pump(), watch())
    writer.close()
    await server.stop()
    print("done; the robot's joint 4 followed the elbow sweep")


asyncio.run(run())
