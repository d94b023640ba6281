"""The live service: a scripted client plays the ball task over the wire.

Starts the server in-process, handshakes, picks the paw, streams a swipe
trace as pose messages, and reads back render frames and metrics.
"""

from limbswap import protocol
from limbswap.pose import frame_to_record
from limbswap.server import ClientConnection, LimbswapServer
from limbswap.synth import synth_trace

server = LimbswapServer(idle_keepalive_s=5.0)
host, port = server.start()
print(f"server on {host}:{port}")

client = ClientConnection.connect(host, port)
ack = client.handshake("demo")
print(f"protocol v{ack.version}; catalog: {', '.join(e['id'] for e in ack.catalog)}")

client.send(protocol.SelectProsthesis(id="paw"))
client.send(protocol.SelectTask(id="ball"))
for frame in synth_trace("reach_and_swipe").frames:
    client.send(protocol.Pose(frame=frame_to_record(frame)))

frames, metrics = 0, None
while True:
    try:
        msg = client.recv(timeout=1.0)
    except Exception:
        break
    if isinstance(msg, protocol.Frame):
        frames += 1
        if frames % 60 == 0:
            ball = msg.frame["task_view"]["ball_position"]
            print(f"  tick {msg.frame['tick']:4d}: ball at ({ball[0]:+.3f}, {ball[1]:+.3f}, {ball[2]:+.3f})")
    elif isinstance(msg, protocol.Metrics):
        metrics = msg.metrics

print(f"received {frames} frames")
if metrics:
    print(f"goal reached in {metrics['time_to_goal_s']:.2f} s, efficiency {metrics['path_efficiency']:.2f}")

client.close()
server.shutdown()
