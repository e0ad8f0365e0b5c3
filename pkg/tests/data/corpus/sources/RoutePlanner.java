package app.nav;

import java.util.ArrayList;
import java.util.List;

class RoutePlanner {

    private final Metrics metrics;

    Route planRoute(Point origin, Point goal) {
        Grid grid = loadGrid();
        List<Point> frontier = new ArrayList<>();
        frontier.add(origin);
        int expanded = 0;
        while (!frontier.isEmpty() && expanded < LIMIT) {
            Point current = popBest(frontier);
            expanded = expanded + 1;
            pushNeighbors(grid, frontier, current);
        }
        metrics.recordExpansions(expanded);
        Route route = traceBack(goal);
        route.simplify();
        return route;
    }

    double scoreSegments(List<Segment> segments) {
        double length = 0.0;
        for (Segment segment : segments) {
            length = length + segment.span();
        }
        double penalty = 0.0;
        for (Segment segment : segments) {
            penalty = penalty + turnCost(segment);
        }
        double raw = length * WEIGHT + penalty;
        double capped = Math.min(raw, CEILING);
        logScore(raw, capped);
        return capped;
    }

    void emitWaypoints(Route route, Sink sink) {
        sink.open();
        for (Point point : route.points()) {
            sink.accept(point.x(), point.y());
        }
        sink.flush();
        sink.close();
    }
}
